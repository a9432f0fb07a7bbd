#pragma once
// Samples, splits and parsed model outputs, plus the line-delimited JSON
// container used for every dataset, report and log file.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace pgds {

using Json = nlohmann::json;

// One image-text pair. label: 0 = non-sarcastic, 1 = sarcastic.
struct Sample {
    std::string id;
    std::optional<std::string> image_path;
    std::string text;
    std::optional<int> label;
    std::optional<std::string> target;
    std::optional<std::string> explanation;
    std::map<std::string, std::string> extra;

    // Decimal value of extra[key]; nullopt when absent. Throws
    // ValidationError when present but not a decimal number.
    std::optional<double> extra_number(const std::string& key) const;

    bool operator==(const Sample&) const = default;
};

enum class SplitName { Train, Validation, Test };

std::string_view to_string(SplitName name);

struct DatasetSplit {
    std::string name = "train";
    std::vector<Sample> samples;

    bool operator==(const DatasetSplit&) const = default;
};

struct SplitCounts {
    std::size_t positive = 0;
    std::size_t negative = 0;
    std::size_t unlabeled = 0;
    std::size_t total = 0;

    bool operator==(const SplitCounts&) const = default;
};

SplitCounts split_stats(const DatasetSplit& split);

// Structured reading of one backend reply. Only parse_structured_output()
// (see prompt.hpp) creates these, which keeps the "non-sarcastic means empty
// target and explanation" invariant in one place.
class ParsedResponse {
  public:
    bool is_sarcastic() const { return sarcastic_; }
    int label() const { return sarcastic_ ? 1 : 0; }
    const std::string& target() const { return target_; }
    const std::string& explanation() const { return explanation_; }
    const std::string& raw() const { return raw_; }

  private:
    friend class ResponseParser;
    ParsedResponse(bool sarcastic, std::string target, std::string explanation, std::string raw);

    bool sarcastic_ = false;
    std::string target_;
    std::string explanation_;
    std::string raw_;
};

Json sample_to_json(const Sample& sample);
// `where` prefixes error messages (e.g. "data.jsonl:12").
Sample sample_from_json(const Json& record, std::string_view where);

DatasetSplit load_dataset(const std::filesystem::path& path);
void save_dataset(const DatasetSplit& split, const std::filesystem::path& path);

// Raw record I/O for the container format. Blank lines are skipped.
std::vector<Json> read_records(const std::filesystem::path& path);
void write_records(const std::vector<Json>& records, const std::filesystem::path& path);
// Compact single-line serialization, UTF-8 kept as-is.
std::string dump_record(const Json& record);

// Provenance for outputs whose format has no room for it (binary files and
// datasets): writes `<path>.provenance.json` holding the run configuration.
void write_provenance(const std::filesystem::path& path, const Json& run_config);

}  // namespace pgds
