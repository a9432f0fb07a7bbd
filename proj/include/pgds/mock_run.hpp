#pragma once
// End-to-end synthetic experiment: build the mock world, train the policy
// against the mock oracle, and compare selection strategies on held-out
// queries.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "pgds/mock_env.hpp"
#include "pgds/strategies.hpp"
#include "pgds/trainer.hpp"

namespace pgds {

struct MockRunConfig {
    MockEnvironmentConfig env;
    TrainerConfig trainer;
    std::size_t golden_window = 500;  // trailing eligible episodes for the final rate
    std::size_t reward_window = 100;  // batches per reward window

    MockRunConfig();
};

struct MockRunResult {
    MockWorld world;
    TrainingResult training;
    // Share of episodes whose candidate pool holds a same-concept sample and
    // whose selection includes one.
    std::vector<double> golden_rate_windows;  // per 500 training episodes
    std::optional<double> golden_rate_final;
    std::optional<double> reward_first_window;
    std::optional<double> reward_last_window;
    std::vector<StrategyRun> strategies;
    std::vector<double> strategy_golden_rate;  // aligned with strategies

    const StrategyRun& strategy(Strategy s) const;
    // Report records: training summary, then one record per strategy.
    std::vector<Json> report_records() const;
};

MockRunResult run_mock_experiment(const MockRunConfig& cfg, const TrainingHooks& hooks = {});

// Writes datasets, stores, checkpoint, training log, predictions and report
// into dir. Every file embeds or sits next to `run_config`.
void write_mock_artifacts(const MockRunResult& result, const Json& run_config, const std::filesystem::path& dir);

}  // namespace pgds
