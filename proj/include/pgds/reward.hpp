#pragma once
// Weighted multi-component reward for one backend reply.

#include <string_view>

#include "pgds/core_data.hpp"
#include "pgds/metrics.hpp"

namespace pgds {

struct RewardWeights {
    double format = 0.25;
    double cls = 0.25;
    double target = 0.25;
    double explanation = 0.25;

    // Non-negative, summing to 1 within 1e-9.
    void validate() const;
    // "a,b,c,d" in the order format, cls, target, explanation.
    static RewardWeights parse(std::string_view text);
};

struct RewardBreakdown {
    double r_format = 0.0;
    double r_cls = 0.0;
    double r_target = 0.0;
    double r_exp = 0.0;
    double total = 0.0;

    bool operator==(const RewardBreakdown&) const = default;
};

// A reply that fails to parse scores 0 on every component. For a sarcastic
// gold sample the target and explanation terms are scorer values (clamped to
// [0,1]) when the reply is also sarcastic, else 0. For a non-sarcastic gold
// sample they are 1 when the reply says non-sarcastic, else 0.
RewardBreakdown compute_reward(std::string_view response, const Sample& gold, const RewardWeights& weights,
                               const TextScorer& scorer, bool strict_parse = false);

// Same rule for an already parsed reply (nullptr = format failure).
RewardBreakdown compute_reward(const ParsedResponse* parsed, const Sample& gold, const RewardWeights& weights,
                               const TextScorer& scorer);

}  // namespace pgds
