#pragma once
// Classification, target and explanation metrics, and report assembly.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pgds/core_data.hpp"
#include "pgds/embedding.hpp"

namespace pgds {

// Positive class = sarcasm (label 1).
struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    void add(int predicted, int gold);
    bool operator==(const ConfusionCounts&) const = default;
};

struct ClassificationReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1_positive = 0.0;
    double f1_macro = 0.0;
};

// Ratios with a zero denominator are 0.
ClassificationReport classification_metrics(const ConfusionCounts& counts);
// pairs are (predicted, gold). Throws on empty input or non-binary labels.
ClassificationReport classification_metrics(std::span<const std::pair<int, int>> pairs);

// Similarity of a predicted string to a gold string, in [0, 1].
class TextScorer {
  public:
    virtual ~TextScorer() = default;
    virtual double score(std::string_view predicted, std::string_view gold) const = 0;
};

// max(0, cosine) of provider text embeddings; equal strings score exactly 1.
class EmbeddingScorer final : public TextScorer {
  public:
    explicit EmbeddingScorer(const EmbeddingProvider& provider) : provider_(provider) {}
    double score(std::string_view predicted, std::string_view gold) const override;

  private:
    const EmbeddingProvider& provider_;
};

double semantic_score(std::string_view predicted, std::string_view gold, const EmbeddingProvider& provider);

// Mean over pairs of S(pred, gold) = [scorer >= threshold or equal after
// whitespace normalization]. nullopt for no pairs.
std::optional<double> target_accuracy(std::span<const std::pair<std::string, std::string>> pairs,
                                      const TextScorer& scorer, double threshold = 0.7);

enum class Tokenization { Char, Whitespace };

Tokenization parse_tokenization(std::string_view name);
std::vector<std::string> tokenize(std::string_view text, Tokenization mode);

// Sentence BLEU, n = 1..4, uniform weights. Counts are clipped by the
// maximum reference count, the brevity penalty uses the reference length
// closest to the hypothesis (shorter wins ties), and a zero precision is
// replaced by 1 / (2 * hypothesis n-gram count + 1). Empty hypothesis -> 0.
double bleu4(std::string_view hypothesis, std::span<const std::string> references,
             Tokenization mode = Tokenization::Char);

struct Prediction {
    std::string id;
    std::string raw;  // backend text as received
};

struct EvalOptions {
    double threshold = 0.7;
    Tokenization tokenization = Tokenization::Char;
    bool strict_parse = false;
};

struct EvalReport {
    std::size_t evaluated = 0;
    std::size_t unparseable = 0;
    ConfusionCounts confusion;
    std::optional<ClassificationReport> classification;
    std::size_t positives = 0;
    std::optional<double> target_accuracy;
    std::optional<double> bleu4;
    std::optional<double> semantic_score_mean;

    // One object with a fixed key set; absent metrics are the string "no data".
    Json to_json() const;
};

// Joins predictions to gold samples by id. An unparseable reply counts as a
// wrong label with empty target and explanation. Throws ValidationError on
// unknown, duplicate or unlabeled ids.
EvalReport build_report(const DatasetSplit& gold, std::span<const Prediction> predictions, const TextScorer& scorer,
                        const EvalOptions& options = {});

}  // namespace pgds
