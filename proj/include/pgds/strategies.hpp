#pragma once
// Demonstration-selection strategies compared at evaluation time.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pgds/backend.hpp"
#include "pgds/core_data.hpp"
#include "pgds/embedding.hpp"
#include "pgds/metrics.hpp"
#include "pgds/policy.hpp"

namespace pgds {

enum class Strategy { ZeroShot, Random1Shot, Rag1Shot, Pgds };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

struct StrategyContext {
    const DatasetSplit* train = nullptr;
    const EmbeddingStore* train_store = nullptr;
    const PolicyParams* policy = nullptr;  // required for Pgds
    std::size_t m = 50;
    std::size_t k = 1;
    std::uint64_t seed = 7;
};

// Demo ids for one query. The query's own id is never selected. Random uses a
// per-query seeded draw; RAG takes the most similar training sample; PGDS
// takes the policy's k most probable candidates among the top-m neighbours.
std::vector<std::string> select_demos(Strategy strategy, const StrategyContext& ctx, const Sample& query,
                                      std::span<const float> query_embedding);

struct StrategyRun {
    Strategy strategy = Strategy::ZeroShot;
    std::vector<Prediction> predictions;
    std::vector<std::vector<std::string>> demos;  // aligned with predictions
    EvalReport report;
};

StrategyRun evaluate_strategy(Strategy strategy, const StrategyContext& ctx, const DatasetSplit& queries,
                              const EmbeddingStore& query_store, ModelBackend& backend, Language language,
                              const TextScorer& scorer, const EvalOptions& options = {});

}  // namespace pgds
