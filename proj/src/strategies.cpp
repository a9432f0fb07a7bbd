#include "pgds/strategies.hpp"

#include <unordered_map>

#include "pgds/common.hpp"
#include "pgds/prompt.hpp"

namespace pgds {

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::ZeroShot: return "zero-shot";
        case Strategy::Random1Shot: return "random-1-shot";
        case Strategy::Rag1Shot: return "rag-1-shot";
        case Strategy::Pgds: return "pgds";
    }
    return "unknown";
}

Strategy parse_strategy(std::string_view name) {
    for (Strategy s : {Strategy::ZeroShot, Strategy::Random1Shot, Strategy::Rag1Shot, Strategy::Pgds}) {
        if (to_string(s) == name) return s;
    }
    throw ValidationError("unknown strategy '" + std::string(name) + "'");
}

std::vector<std::string> select_demos(Strategy strategy, const StrategyContext& ctx, const Sample& query,
                                      std::span<const float> query_embedding) {
    if (strategy == Strategy::ZeroShot) return {};
    if (!ctx.train || !ctx.train_store) throw ValidationError("strategy needs a training split and store");
    const DatasetSplit& train = *ctx.train;

    if (strategy == Strategy::Random1Shot) {
        std::vector<std::size_t> eligible;
        for (std::size_t i = 0; i < train.samples.size(); ++i) {
            if (train.samples[i].id != query.id) eligible.push_back(i);
        }
        if (eligible.empty()) throw ValidationError("no training samples to draw a demonstration from");
        Rng rng(hash_bytes(query.id, ctx.seed));
        return {train.samples[eligible[rng.below(eligible.size())]].id};
    }

    if (strategy == Strategy::Rag1Shot) {
        return {retrieve_candidates(query_embedding, *ctx.train_store, 1, {query.id}).front().id};
    }

    if (!ctx.policy) throw ValidationError("pgds strategy needs a trained policy");
    const auto candidates = retrieve_candidates(query_embedding, *ctx.train_store, ctx.m, {query.id});
    const CandidatePool pool = make_pool(*ctx.train_store, candidates);
    const std::vector<double> q(query_embedding.begin(), query_embedding.end());
    const SelectionDistribution dist = score_candidates(*ctx.policy, q, pool);
    return greedy_top_k(dist, std::min(ctx.k, dist.size())).ids;
}

StrategyRun evaluate_strategy(Strategy strategy, const StrategyContext& ctx, const DatasetSplit& queries,
                              const EmbeddingStore& query_store, ModelBackend& backend, Language language,
                              const TextScorer& scorer, const EvalOptions& options) {
    std::unordered_map<std::string, const Sample*> train_by_id;
    if (ctx.train) {
        for (const Sample& s : ctx.train->samples) train_by_id.emplace(s.id, &s);
    }
    StrategyRun run;
    run.strategy = strategy;
    for (const Sample& q : queries.samples) {
        const auto ids = select_demos(strategy, ctx, q, query_store.row(q.id));
        std::vector<Sample> demos;
        for (const auto& id : ids) {
            auto it = train_by_id.find(id);
            if (it == train_by_id.end()) throw ValidationError("selected demonstration '" + id + "' is not in the training split");
            demos.push_back(*it->second);
        }
        const PromptBundle bundle = build_prompt(demos, q, language);
        run.predictions.push_back({q.id, backend.respond(bundle)});
        run.demos.push_back(ids);
    }
    run.report = build_report(queries, run.predictions, scorer, options);
    return run;
}

}  // namespace pgds
