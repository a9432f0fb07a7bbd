#include "pgds/mock_run.hpp"

#include <algorithm>
#include <numeric>

#include "pgds/common.hpp"

namespace pgds {

namespace {

std::optional<double> mean_of(const std::vector<Json>& log, std::size_t begin, std::size_t end) {
    if (begin >= end) return std::nullopt;
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += log[i]["mean_reward"].get<double>();
    return sum / static_cast<double>(end - begin);
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json("no data"); }

}  // namespace

MockRunConfig::MockRunConfig() {
    // The oracle never fails, so there is nothing to back off from; the rate
    // is chosen so the default world converges well inside 5,000 episodes.
    trainer.lr = 0.5;
    trainer.backoff = std::chrono::milliseconds(0);
}

const StrategyRun& MockRunResult::strategy(Strategy s) const {
    for (const auto& run : strategies) {
        if (run.strategy == s) return run;
    }
    throw ValidationError("strategy '" + std::string(to_string(s)) + "' was not evaluated");
}

MockRunResult run_mock_experiment(const MockRunConfig& cfg, const TrainingHooks& hooks) {
    MockRunResult out;
    out.world = generate_mock_dataset(cfg.env);
    const MockWorld& world = out.world;
    MockOracle oracle(cfg.env, {&world.train, &world.heldout});
    const HashingProvider provider(256, cfg.env.seed);
    const EmbeddingScorer scorer(provider);

    struct Mark {
        std::size_t episode;
        bool hit;
    };
    std::vector<Mark> marks;
    std::size_t episode_index = 0;
    TrainingHooks inner = hooks;
    inner.on_episode = [&](const Episode& ep) {
        if (has_golden(world.concepts, ep.query_id, ep.candidate_ids)) {
            marks.push_back({episode_index, has_golden(world.concepts, ep.query_id, ep.selected.ids)});
        }
        ++episode_index;
        if (hooks.on_episode) hooks.on_episode(ep);
    };
    out.training = run_training(cfg.trainer, world.train, world.train_store, oracle, scorer, inner);

    constexpr std::size_t kEpisodeWindow = 500;
    for (std::size_t start = 0; start < out.training.episodes; start += kEpisodeWindow) {
        std::size_t hits = 0, n = 0;
        for (const Mark& mk : marks) {
            if (mk.episode >= start && mk.episode < start + kEpisodeWindow) {
                ++n;
                hits += mk.hit ? 1 : 0;
            }
        }
        out.golden_rate_windows.push_back(n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n));
    }
    if (!marks.empty()) {
        const std::size_t take = std::min(cfg.golden_window, marks.size());
        std::size_t hits = 0;
        for (std::size_t i = marks.size() - take; i < marks.size(); ++i) hits += marks[i].hit ? 1 : 0;
        out.golden_rate_final = static_cast<double>(hits) / static_cast<double>(take);
    }
    const auto& log = out.training.log;
    const std::size_t w = std::min(cfg.reward_window, log.size());
    out.reward_first_window = mean_of(log, 0, w);
    out.reward_last_window = mean_of(log, log.size() - w, log.size());

    StrategyContext ctx;
    ctx.train = &world.train;
    ctx.train_store = &world.train_store;
    ctx.policy = &out.training.state.params;
    ctx.m = cfg.trainer.m;
    ctx.k = cfg.trainer.k;
    ctx.seed = cfg.trainer.seed;
    for (Strategy s : {Strategy::ZeroShot, Strategy::Random1Shot, Strategy::Rag1Shot, Strategy::Pgds}) {
        StrategyRun run = evaluate_strategy(s, ctx, world.heldout, world.heldout_store, oracle,
                                            cfg.trainer.language, scorer);
        std::size_t golden = 0;
        for (std::size_t i = 0; i < run.demos.size(); ++i) {
            golden += has_golden(world.concepts, run.predictions[i].id, run.demos[i]) ? 1 : 0;
        }
        out.strategy_golden_rate.push_back(run.demos.empty() ? 0.0
                                                             : static_cast<double>(golden) /
                                                                   static_cast<double>(run.demos.size()));
        out.strategies.push_back(std::move(run));
    }
    return out;
}

std::vector<Json> MockRunResult::report_records() const {
    std::vector<Json> records;
    records.push_back({{"kind", "training"},
                       {"episodes", training.episodes},
                       {"updates", training.state.step},
                       {"faults", training.faults},
                       {"interrupted", training.interrupted},
                       {"final_baseline", training.state.baseline},
                       {"golden_rate_final", optional_json(golden_rate_final)},
                       {"golden_rate_windows", golden_rate_windows},
                       {"reward_first_window", optional_json(reward_first_window)},
                       {"reward_last_window", optional_json(reward_last_window)}});
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        Json rec = {{"kind", "strategy"}, {"strategy", std::string(to_string(strategies[i].strategy))}};
        rec.update(strategies[i].report.to_json());
        rec["golden_rate"] = strategy_golden_rate[i];
        records.push_back(std::move(rec));
    }
    return records;
}

void write_mock_artifacts(const MockRunResult& result, const Json& run_config, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw RuntimeFailure("cannot create '" + dir.string() + "': " + ec.message());

    const Json header = {{"kind", "run_config"}, {"version", std::string(kArtifactVersion)}, {"config", run_config}};
    const auto with_header = [&header](std::vector<Json> records) {
        records.insert(records.begin(), header);
        return records;
    };

    save_dataset(result.world.train, dir / "train.jsonl");
    save_dataset(result.world.heldout, dir / "heldout.jsonl");
    store_save(result.world.train_store, dir / "train.emb");
    store_save(result.world.heldout_store, dir / "heldout.emb");
    save_checkpoint(result.training.state.params, dir / "policy.pgds");
    for (const char* name : {"train.jsonl", "heldout.jsonl", "train.emb", "heldout.emb", "policy.pgds"}) {
        write_provenance(dir / name, run_config);
    }
    write_records(with_header(result.training.log), dir / "training_log.jsonl");
    for (const StrategyRun& run : result.strategies) {
        std::vector<Json> preds;
        for (const Prediction& p : run.predictions) preds.push_back({{"id", p.id}, {"response", p.raw}});
        write_records(with_header(std::move(preds)), dir / ("predictions-" + std::string(to_string(run.strategy)) + ".jsonl"));
    }
    write_records(with_header(result.report_records()), dir / "report.jsonl");
}

}  // namespace pgds
