#include "pgds/reward.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <vector>

#include "pgds/common.hpp"
#include "pgds/prompt.hpp"

namespace pgds {

void RewardWeights::validate() const {
    for (double w : {format, cls, target, explanation}) {
        if (!std::isfinite(w) || w < 0.0) throw ValidationError("reward weights must be finite and non-negative");
    }
    if (std::abs(format + cls + target + explanation - 1.0) > 1e-9) {
        throw ValidationError("reward weights must sum to 1");
    }
}

RewardWeights RewardWeights::parse(std::string_view text) {
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = std::min(text.find(',', start), text.size());
        std::string_view item = text.substr(start, comma - start);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc() || ptr != item.data() + item.size() || item.empty()) {
            throw ValidationError("invalid reward weight '" + std::string(item) + "'");
        }
        values.push_back(v);
        start = comma + 1;
    }
    if (values.size() != 4) throw ValidationError("expected four comma-separated reward weights");
    RewardWeights w{values[0], values[1], values[2], values[3]};
    w.validate();
    return w;
}

RewardBreakdown compute_reward(const ParsedResponse* parsed, const Sample& gold, const RewardWeights& weights,
                               const TextScorer& scorer) {
    if (!gold.label) throw ValidationError("reward needs a labeled gold sample ('" + gold.id + "')");
    RewardBreakdown r;
    if (!parsed) return r;
    r.r_format = 1.0;
    r.r_cls = parsed->label() == *gold.label ? 1.0 : 0.0;
    if (*gold.label == 1) {
        if (parsed->is_sarcastic()) {
            r.r_target = std::clamp(scorer.score(parsed->target(), gold.target.value_or("")), 0.0, 1.0);
            r.r_exp = std::clamp(scorer.score(parsed->explanation(), gold.explanation.value_or("")), 0.0, 1.0);
        }
    } else if (!parsed->is_sarcastic()) {
        r.r_target = 1.0;
        r.r_exp = 1.0;
    }
    // Weights may sum to 1 only within rounding.
    r.total = std::clamp(weights.format * r.r_format + weights.cls * r.r_cls + weights.target * r.r_target +
                             weights.explanation * r.r_exp,
                         0.0, 1.0);
    return r;
}

RewardBreakdown compute_reward(std::string_view response, const Sample& gold, const RewardWeights& weights,
                               const TextScorer& scorer, bool strict_parse) {
    const auto parsed = parse_structured_output(response, strict_parse);
    return compute_reward(parsed ? &*parsed : nullptr, gold, weights, scorer);
}

}  // namespace pgds
