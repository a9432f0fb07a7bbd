#pragma once
// REINFORCE training of the selection policy with an EMA reward baseline.

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pgds/backend.hpp"
#include "pgds/core_data.hpp"
#include "pgds/embedding.hpp"
#include "pgds/policy.hpp"
#include "pgds/prompt.hpp"
#include "pgds/reward.hpp"

namespace pgds {

struct TrainerState {
    PolicyParams params;
    double baseline = 0.0;
    double gamma = 0.9;
    double lr = 1e-3;
    std::uint64_t step = 0;  // applied updates
    std::size_t batch_size = 8;
    std::uint64_t seed = 7;
};

// gamma * b + (1 - gamma) * r_prev
double update_baseline(const TrainerState& state, double r_prev);

struct Episode {
    std::string query_id;
    std::vector<std::string> candidate_ids;
    SelectedSet selected;
    double entropy = 0.0;  // of the selection distribution
    std::optional<ParsedResponse> response;
    std::optional<std::string> fault;  // backend failure after retries
    RewardBreakdown reward;
    PolicyGradient grad;
};

// theta += lr / N * sum (R_i - b) g_i with b fixed for the batch, then one
// baseline update with the batch-mean reward. Throws RuntimeFailure on a
// non-finite gradient or update and leaves the state untouched.
void reinforce_update(TrainerState& state, std::span<const Episode> batch);

struct TrainerConfig {
    std::size_t k = 1;
    std::size_t m = 50;
    std::size_t batch = 8;
    std::size_t hidden = 256;
    std::size_t episodes = 5000;
    double lr = 1e-3;
    double gamma = 0.9;
    RewardWeights weights;
    std::uint64_t seed = 7;
    Language language = Language::Zh;
    bool strict_parse = false;
    int max_retries = 2;
    std::chrono::milliseconds backoff{500};  // doubled per retry

    void validate() const;
    Json to_json() const;
};

struct TrainingHooks {
    std::function<void(const Episode&)> on_episode;
    std::function<void(const Json&)> on_log;
    const std::atomic<bool>* stop = nullptr;
};

struct TrainingResult {
    TrainerState state;
    std::vector<Json> log;  // one record per update
    std::size_t episodes = 0;
    std::size_t faults = 0;
    bool interrupted = false;
};

// Cycles through seeded shuffles of the training queries. Each episode
// retrieves the top-m neighbours of the query (itself excluded), samples k
// demonstrations, asks the backend, scores the reply and keeps the gradient;
// every `batch` episodes the policy is updated. Episodes whose backend call
// fails after all retries get reward 0 and are left out of the update.
TrainingResult run_training(const TrainerConfig& config, const DatasetSplit& dataset, const EmbeddingStore& store,
                            ModelBackend& backend, const TextScorer& scorer, const TrainingHooks& hooks = {},
                            std::optional<PolicyParams> initial = std::nullopt);

}  // namespace pgds
