#pragma once
// Selection policy: a two-layer ReLU MLP scores each (query, candidate) pair,
// a softmax over the candidate pool turns scores into probabilities, and k
// demonstrations are drawn without replacement (Plackett-Luce).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pgds/common.hpp"
#include "pgds/embedding.hpp"

namespace pgds {

// theta = (W1, b1, W2, b2). W1 is hidden x (2*dim), row-major; columns
// [0, dim) read the query, [dim, 2*dim) read the candidate.
struct PolicyParams {
    std::size_t dim = 0;
    std::size_t hidden = 0;
    std::vector<double> w1;
    std::vector<double> b1;
    std::vector<double> w2;
    double b2 = 0.0;

    static PolicyParams zeros(std::size_t dim, std::size_t hidden);

    std::size_t input_dim() const { return 2 * dim; }
    std::size_t parameter_count() const { return w1.size() + b1.size() + w2.size() + 1; }

    // Flat view in the order W1, b1, W2, b2 (used by tests and updates).
    std::vector<double> flatten() const;
    void assign_flat(std::span<const double> flat);
    bool all_finite() const;

    bool operator==(const PolicyParams&) const = default;
};

using PolicyGradient = PolicyParams;

// Glorot-uniform weights, zero biases; bit-reproducible per seed.
PolicyParams init_params(std::size_t dim, std::size_t hidden, std::uint64_t seed);

// Candidate features for one query, row-major n x dim.
struct CandidatePool {
    std::size_t dim = 0;
    std::vector<std::string> ids;
    std::vector<double> features;

    std::size_t size() const { return ids.size(); }
    std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }
    void add(std::string id, std::span<const float> values);
    void add(std::string id, std::span<const double> values);
};

CandidatePool make_pool(const EmbeddingStore& store, const std::vector<Candidate>& candidates);

struct SelectionDistribution {
    std::vector<std::string> candidate_ids;
    std::vector<double> logits;
    std::vector<double> probs;

    std::size_t size() const { return probs.size(); }
    double entropy() const;
};

struct SelectedSet {
    std::vector<std::string> ids;
    std::vector<std::size_t> indices;  // positions in the distribution
    double log_prob = 0.0;
};

// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);

SelectionDistribution score_candidates(const PolicyParams& params, std::span<const double> query,
                                       const CandidatePool& pool);

// log P(ordered selection) under sequential draws that renormalize over the
// candidates not yet drawn.
double plackett_luce_log_prob(std::span<const double> probs, std::span<const std::size_t> order);

SelectedSet sample_top_k(const SelectionDistribution& dist, std::size_t k, Rng& rng);
// Deterministic: the k most probable candidates, ties by position.
SelectedSet greedy_top_k(const SelectionDistribution& dist, std::size_t k);

double selection_log_prob(const SelectionDistribution& dist, std::span<const std::string> ordered_ids);

// d log pi(selection | query) / d theta by backpropagation through the
// Plackett-Luce likelihood, the pool softmax and the shared MLP.
PolicyGradient policy_log_prob_grad(const PolicyParams& params, std::span<const double> query,
                                    const CandidatePool& pool, std::span<const std::string> ordered_ids);

// Binary checkpoint: "PGDS", u32 dim, u32 hidden, then W1, b1, W2, b2 as
// little-endian float64, row-major.
void save_checkpoint(const PolicyParams& params, const std::filesystem::path& path);
PolicyParams load_checkpoint(const std::filesystem::path& path);

}  // namespace pgds
