#pragma once
// Synthetic world with a known optimum: every sample has a hidden concept
// that decides whether a demonstration helps, while cosine similarity is
// dominated by an unrelated "surface" feature.
//
// Layout (Q query surfaces, C concepts):
//   background  J samples on one shared surface, no concept features, label 0
//   exemplars   one per concept, each on its own surface
//   queries     one per concept on surface c % Q (training split)
//   held-out    `heldout_per_concept` queries per concept on other query surfaces
// Embedding = normalize(onehot(surface) + scale * onehot(concept)).
// Training ids sort background < exemplars < queries, so zero-similarity
// ties in retrieval pull in background samples first.

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pgds/backend.hpp"
#include "pgds/core_data.hpp"
#include "pgds/embedding.hpp"

namespace pgds {

struct MockEnvironmentConfig {
    std::size_t concept_count = 64;
    std::size_t query_surfaces = 8;
    std::size_t heldout_per_concept = 2;
    std::size_t background_count = 50;
    double concept_feature_scale = 0.1;
    // Probability that a query without a same-concept demonstration is still
    // answered correctly.
    double noise_level = 0.0;
    std::uint64_t seed = 7;

    std::size_t surface_dim() const { return query_surfaces + concept_count + 1; }
    std::size_t concept_dim() const { return concept_count; }
    std::size_t dim() const { return surface_dim() + concept_dim(); }
    void validate() const;
    Json to_json() const;
};

using ConceptMap = std::unordered_map<std::string, long long>;

struct MockWorld {
    DatasetSplit train;
    DatasetSplit heldout;
    EmbeddingStore train_store;
    EmbeddingStore heldout_store;
    ConceptMap concepts;
};

// Samples carry their concept and surface in extra["concept"] and
// extra["surface"], so a saved dataset is enough to rebuild the oracle.
MockWorld generate_mock_dataset(const MockEnvironmentConfig& cfg);

// Reads extra["concept"] from every sample.
ConceptMap concept_map(const std::vector<const DatasetSplit*>& splits);

// True when some demonstration shares the query's concept.
bool has_golden(const ConceptMap& concepts, const std::string& query_id, const std::vector<std::string>& demo_ids);

class MockOracle final : public ModelBackend {
  public:
    MockOracle(const MockEnvironmentConfig& cfg, const std::vector<const DatasetSplit*>& splits);

    // Pure function of (seed, noise, query id, sorted demo ids). A matching
    // demonstration gives the gold answer; otherwise the gold answer comes
    // back with probability noise_level and a flipped label otherwise.
    std::string respond(const PromptBundle& bundle) override;
    BackendCapabilities capabilities() const override { return {}; }

  private:
    const Sample& lookup(const std::string& id) const;

    std::uint64_t seed_;
    double noise_level_;
    std::unordered_map<std::string, Sample> samples_;
    ConceptMap concepts_;
};

}  // namespace pgds
