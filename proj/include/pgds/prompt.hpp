#pragma once
// Prompt templates (zero-shot and few-shot) and the reader for the
// structured answer format the templates ask for.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pgds/core_data.hpp"

namespace pgds {

enum class Language { Zh, En };

std::string_view to_string(Language lang);
Language parse_language(std::string_view name);

// A prompt is a sequence of text runs and image attachments. Image values are
// paths relative to the dataset image root; backends decide how to ship them.
struct PromptPart {
    enum class Kind { Text, Image };
    Kind kind = Kind::Text;
    std::string value;

    bool operator==(const PromptPart&) const = default;
};

struct PromptBundle {
    Language language = Language::Zh;
    std::string instruction;  // output-format instructions (system role)
    std::vector<std::string> demo_ids;
    std::string query_id;
    std::vector<PromptPart> parts;

    std::size_t image_count() const;
    // Flattened user text; each image shows up as "[image]".
    std::string text() const;

    bool operator==(const PromptBundle&) const = default;
};

// Demonstrations appear in the given order. No demos selects the zero-shot
// template. Throws ValidationError for an unlabeled demo or a sarcastic demo
// without target and explanation.
PromptBundle build_prompt(const std::vector<Sample>& demos, const Sample& query, Language language);

class ResponseParser {
  public:
    explicit ResponseParser(bool strict = false) : strict_(strict) {}

    // nullopt on a format failure: no verdict, or a sarcastic verdict without
    // both fields. Strict mode additionally requires a <result> block.
    std::optional<ParsedResponse> parse(std::string_view raw) const;

  private:
    bool strict_;
};

std::optional<ParsedResponse> parse_structured_output(std::string_view raw, bool strict = false);

// Canonical tagged answer: a verdict line and a <result> block. Field text is
// escaped so that parse(render_tagged(...)) returns the fields unchanged.
std::string render_tagged(bool sarcastic, std::string_view target, std::string_view explanation,
                          Language language = Language::En);
std::string render_tagged(const ParsedResponse& response, Language language = Language::En);

}  // namespace pgds
