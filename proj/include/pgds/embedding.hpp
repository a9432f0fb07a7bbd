#pragma once
// Joint text+image embeddings, the EMB1 store and exact cosine retrieval.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pgds/core_data.hpp"

namespace pgds {

using EmbeddingVector = std::vector<double>;

// Source of per-modality vectors. Implementations must be deterministic and
// keep their dimensions fixed for the lifetime of the instance.
class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t text_dim() const = 0;
    virtual std::size_t image_dim() const = 0;
    // Vector for free text (also used by the semantic scorer).
    virtual EmbeddingVector embed_text(std::string_view text) const = 0;
    // Text vector for a dataset sample; defaults to embed_text(sample.text).
    virtual EmbeddingVector sample_text(const Sample& sample) const { return embed_text(sample.text); }
    // nullopt when the sample has no image.
    virtual std::optional<EmbeddingVector> sample_image(const Sample& sample) const = 0;
};

// Offline provider. Text: signed feature hashing of 1..3-codepoint n-grams.
// Image: the 64 perceptual-hash bits mapped to +-1.
class HashingProvider final : public EmbeddingProvider {
  public:
    explicit HashingProvider(std::size_t text_dim = 256, std::uint64_t seed = 0,
                             std::filesystem::path image_root = {});
    std::size_t text_dim() const override { return text_dim_; }
    std::size_t image_dim() const override { return 64; }
    EmbeddingVector embed_text(std::string_view text) const override;
    std::optional<EmbeddingVector> sample_image(const Sample& sample) const override;

  private:
    std::size_t text_dim_;
    std::uint64_t seed_;
    std::filesystem::path image_root_;
};

// Precomputed encoder outputs keyed by sample id, read from a line-delimited
// file of {"id": ..., "text": [...], "image": [...]} records ("image" may be
// omitted or null).
class ImportedProvider final : public EmbeddingProvider {
  public:
    static ImportedProvider load(const std::filesystem::path& path);
    std::size_t text_dim() const override { return text_dim_; }
    std::size_t image_dim() const override { return image_dim_; }
    EmbeddingVector embed_text(std::string_view text) const override;
    EmbeddingVector sample_text(const Sample& sample) const override;
    std::optional<EmbeddingVector> sample_image(const Sample& sample) const override;

  private:
    struct Entry {
        EmbeddingVector text;
        std::optional<EmbeddingVector> image;
    };
    std::size_t text_dim_ = 0;
    std::size_t image_dim_ = 0;
    std::unordered_map<std::string, Entry> entries_;
};

enum class JointMode {
    Normalized,  // each modality scaled to unit L2 norm before concatenation
    Raw,         // plain concatenation of encoder outputs
};

// h = concat(text part, image part); an absent image contributes zeros.
EmbeddingVector joint_embed(const EmbeddingProvider& provider, const Sample& sample,
                            JointMode mode = JointMode::Normalized);

// a.b / (|a||b|), 0 when either norm is 0. Throws on dimension mismatch.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Row-major float32 matrix of joint embeddings aligned with sample ids.
class EmbeddingStore {
  public:
    EmbeddingStore() = default;
    explicit EmbeddingStore(std::size_t dim) : dim_(dim) {}

    void add(std::string id, std::span<const double> values);
    void add(std::string id, std::span<const float> values);

    std::size_t size() const { return ids_.size(); }
    std::size_t dim() const { return dim_; }
    bool empty() const { return ids_.empty(); }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<float>& matrix() const { return matrix_; }

    std::span<const float> row(std::size_t i) const { return {matrix_.data() + i * dim_, dim_}; }
    double row_norm(std::size_t i) const { return norms_[i]; }
    std::optional<std::size_t> find(const std::string& id) const;
    std::span<const float> row(const std::string& id) const;

    bool operator==(const EmbeddingStore& other) const;

  private:
    std::size_t dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<float> matrix_;
    std::vector<double> norms_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct Candidate {
    std::string id;
    std::size_t row = 0;
    double similarity = 0.0;
};

// Exact top-m by descending cosine similarity, ties by ascending id.
std::vector<Candidate> retrieve_candidates(std::span<const float> query, const EmbeddingStore& store,
                                           std::size_t m = 50, const std::unordered_set<std::string>& exclude = {});

// Binary EMB1 format: magic, u32 count, u32 dim, float32 rows, then
// u32-length-prefixed UTF-8 ids. Little-endian throughout.
void store_save(const EmbeddingStore& store, const std::filesystem::path& path);
EmbeddingStore store_load(const std::filesystem::path& path);

EmbeddingStore build_store(const EmbeddingProvider& provider, const DatasetSplit& split,
                           JointMode mode = JointMode::Normalized);

}  // namespace pgds
