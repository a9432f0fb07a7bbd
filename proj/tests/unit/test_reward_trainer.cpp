#include <doctest.h>

#include <cmath>
#include <map>

#include "pgds/mock_env.hpp"
#include "pgds/mock_run.hpp"
#include "pgds/reward.hpp"
#include "pgds/trainer.hpp"
#include "support.hpp"

using namespace pgds;

namespace {

// Scores by gold string lookup; 0 otherwise.
class TableScorer final : public TextScorer {
  public:
    std::map<std::string, double> by_gold;
    double score(std::string_view, std::string_view gold) const override {
        auto it = by_gold.find(std::string(gold));
        return it == by_gold.end() ? 0.0 : it->second;
    }
};

Sample gold(int label) {
    Sample s;
    s.id = "g";
    s.label = label;
    if (label == 1) {
        s.target = "T";
        s.explanation = "E";
    }
    return s;
}

// Fails with a retryable error `failures` times, then answers `reply`.
class FlakyBackend final : public ModelBackend {
  public:
    FlakyBackend(int failures, std::string reply) : failures_(failures), reply_(std::move(reply)) {}
    std::string respond(const PromptBundle&) override {
        ++calls;
        if (failures_-- > 0) throw TimeoutError("stub timeout");
        return reply_;
    }
    BackendCapabilities capabilities() const override { return {}; }
    int calls = 0;

  private:
    int failures_;
    std::string reply_;
};

class RefusingBackend final : public ModelBackend {
  public:
    std::string respond(const PromptBundle&) override { throw CapabilityError("no images"); }
    BackendCapabilities capabilities() const override { return {false, false}; }
};

struct TinyWorld {
    MockEnvironmentConfig env;
    MockWorld world;
    TinyWorld() {
        env.concept_count = 6;
        env.query_surfaces = 3;
        env.heldout_per_concept = 1;
        env.background_count = 4;
        world = generate_mock_dataset(env);
    }
};

TrainerConfig tiny_config() {
    TrainerConfig cfg;
    cfg.hidden = 8;
    cfg.episodes = 40;
    cfg.batch = 4;
    cfg.m = 5;
    cfg.lr = 0.1;
    cfg.backoff = std::chrono::milliseconds(0);
    return cfg;
}

}  // namespace

TEST_SUITE("reward-trainer") {

TEST_CASE("reward examples") {
    TableScorer sc;
    sc.by_gold = {{"T", 0.8}, {"E", 0.6}};
    const RewardWeights w;
    const auto r = compute_reward(render_tagged(true, "t", "e"), gold(1), w, sc);
    CHECK(r.r_format == 1.0);
    CHECK(r.r_cls == 1.0);
    CHECK(r.r_target == 0.8);
    CHECK(r.r_exp == 0.6);
    CHECK(r.total == doctest::Approx(0.85));

    CHECK(compute_reward("garbage", gold(1), w, sc) == RewardBreakdown{});
    CHECK(compute_reward("garbage", gold(0), w, sc) == RewardBreakdown{});

    const auto miss = compute_reward(render_tagged(false, "", ""), gold(1), w, sc);
    CHECK(miss.r_format == 1.0);
    CHECK(miss.r_cls == 0.0);
    CHECK(miss.total == doctest::Approx(0.25));

    const auto neg = compute_reward(render_tagged(false, "", ""), gold(0), w, sc);
    CHECK(neg.total == doctest::Approx(1.0));
    const auto fp = compute_reward(render_tagged(true, "x", "y"), gold(0), w, sc);
    CHECK(fp.r_target == 0.0);
    CHECK(fp.total == doctest::Approx(0.25));

    TableScorer perfect;
    perfect.by_gold = {{"T", 1.0}, {"E", 1.0}};
    const auto skew = RewardWeights::parse("0.1,0.2,0.3,0.4");
    CHECK(compute_reward(render_tagged(true, "T", "E"), gold(1), skew, perfect).total == doctest::Approx(1.0));

    Sample unl = gold(1);
    unl.label.reset();
    CHECK_THROWS_AS(compute_reward("x", unl, w, sc), ValidationError);
}

TEST_CASE("weights parsing") {
    const auto w = RewardWeights::parse("0.4,0.3,0.2,0.1");
    CHECK(w.format == 0.4);
    CHECK(w.explanation == 0.1);
    CHECK_THROWS_AS(RewardWeights::parse("0.5,0.5,0.5,0.5"), ValidationError);
    CHECK_THROWS_AS(RewardWeights::parse("1,0,0"), ValidationError);
    CHECK_THROWS_AS(RewardWeights::parse("-0.5,0.5,0.5,0.5"), ValidationError);
    CHECK_THROWS_AS(RewardWeights::parse("a,b,c,d"), ValidationError);
}

TEST_CASE("baseline update") {
    TrainerState s;
    s.baseline = 0.0;
    CHECK(update_baseline(s, 1.0) == doctest::Approx(0.1));
    s.baseline = 0.5;
    CHECK(update_baseline(s, 0.5) == 0.5);
    s.baseline = 1.0;
    CHECK(update_baseline(s, 0.0) == doctest::Approx(0.9));

    for (double b0 : {0.0, 0.3, 1.0}) {
        TrainerState st;
        st.baseline = b0;
        const double R = 0.7;
        for (int t = 1; t <= 50; ++t) {
            st.baseline = update_baseline(st, R);
            CHECK(std::fabs(st.baseline - (R - std::pow(0.9, t) * (R - b0))) < 1e-12);
        }
    }
}

TEST_CASE("reinforce update rules") {
    TrainerState st;
    st.params = init_params(2, 3, 1);
    st.lr = 1.0;
    st.baseline = 0.5;
    Episode ep;
    ep.grad = init_params(2, 3, 2);
    ep.reward.total = 0.5;
    const auto before = st.params;
    std::vector<Episode> batch{ep, ep};
    reinforce_update(st, batch);
    CHECK(st.params == before);
    CHECK(st.baseline == 0.5);
    CHECK(st.step == 1);

    TrainerState one;
    one.params = init_params(2, 3, 1);
    one.lr = 1.0;
    one.baseline = 0.0;
    ep.reward.total = 1.0;
    reinforce_update(one, std::vector<Episode>{ep});
    const auto th = before.flatten(), g = ep.grad.flatten(), after = one.params.flatten();
    for (std::size_t i = 0; i < th.size(); ++i) CHECK(after[i] == th[i] + g[i]);

    TrainerState bad = one;
    Episode nan = ep;
    nan.grad.w1[0] = NAN;
    const auto snapshot = bad.params;
    CHECK_THROWS_AS(reinforce_update(bad, std::vector<Episode>{ep, nan}), RuntimeFailure);
    CHECK(bad.params == snapshot);
    CHECK(bad.step == one.step);
}

TEST_CASE("no training queries leaves the policy untouched") {
    TinyWorld tw;
    DatasetSplit empty;
    MockOracle oracle(tw.env, {&tw.world.train});
    TableScorer sc;
    auto cfg = tiny_config();
    const auto r = run_training(cfg, empty, tw.world.train_store, oracle, sc);
    CHECK(r.log.empty());
    CHECK(r.episodes == 0);
    CHECK(r.state.params == init_params(tw.world.train_store.dim(), cfg.hidden, cfg.seed));
}

TEST_CASE("training is deterministic and logs each update") {
    TinyWorld tw;
    TableScorer sc;
    auto cfg = tiny_config();
    cfg.episodes = 42;  // trailing partial batch
    MockOracle o1(tw.env, {&tw.world.train}), o2(tw.env, {&tw.world.train});
    const auto a = run_training(cfg, tw.world.train, tw.world.train_store, o1, sc);
    const auto b = run_training(cfg, tw.world.train, tw.world.train_store, o2, sc);
    CHECK(a.state.params == b.state.params);
    CHECK(a.log == b.log);
    CHECK(a.log.size() == 11);
    CHECK(a.state.step == 11);
    for (const auto& rec : a.log) {
        for (const char* key : {"step", "episodes", "mean_reward", "baseline", "entropy", "faults"}) {
            CHECK(rec.contains(key));
        }
    }
}

TEST_CASE("retries and faults") {
    TinyWorld tw;
    TableScorer sc;
    auto cfg = tiny_config();
    cfg.episodes = 1;
    cfg.batch = 1;
    cfg.max_retries = 2;
    FlakyBackend recovers(2, render_tagged(false, "", ""));
    auto r = run_training(cfg, tw.world.train, tw.world.train_store, recovers, sc);
    CHECK(recovers.calls == 3);
    CHECK(r.faults == 0);
    CHECK(r.state.step == 1);

    FlakyBackend dead(100, "");
    std::vector<Episode> seen;
    TrainingHooks hooks;
    hooks.on_episode = [&](const Episode& ep) { seen.push_back(ep); };
    r = run_training(cfg, tw.world.train, tw.world.train_store, dead, sc, hooks);
    CHECK(dead.calls == 3);
    CHECK(r.faults == 1);
    REQUIRE(seen.size() == 1);
    CHECK(seen[0].fault.has_value());
    CHECK(seen[0].reward.total == 0.0);
    CHECK(r.state.step == 0);
    CHECK(r.log.at(0)["faults"] == 1);

    RefusingBackend refuse;
    CHECK_THROWS_AS(run_training(cfg, tw.world.train, tw.world.train_store, refuse, sc), CapabilityError);
}

TEST_CASE("stop flag interrupts before the next episode") {
    TinyWorld tw;
    TableScorer sc;
    auto cfg = tiny_config();
    std::atomic<bool> stop{false};
    TrainingHooks hooks;
    hooks.stop = &stop;
    std::size_t n = 0;
    hooks.on_episode = [&](const Episode&) {
        if (++n == 6) stop = true;
    };
    MockOracle o(tw.env, {&tw.world.train});
    const auto r = run_training(cfg, tw.world.train, tw.world.train_store, o, sc, hooks);
    CHECK(r.interrupted);
    CHECK(r.episodes == 6);
    CHECK(r.log.size() == 1);  // the partial second batch is dropped
}

TEST_CASE("config validation") {
    TrainerConfig cfg;
    cfg.k = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.m = 1;
    cfg.k = 2;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.gamma = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.lr = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("mean reward rises on a small planted world") {
    MockRunConfig cfg;
    cfg.env.concept_count = 16;
    cfg.env.query_surfaces = 4;
    cfg.env.background_count = 20;
    cfg.trainer.hidden = 32;
    cfg.trainer.m = 10;
    cfg.trainer.episodes = 1600;
    cfg.reward_window = 50;
    const auto r = run_mock_experiment(cfg);
    REQUIRE(r.reward_first_window);
    REQUIRE(r.reward_last_window);
    CHECK(*r.reward_last_window > *r.reward_first_window);
    REQUIRE(r.golden_rate_final);
    CHECK(*r.golden_rate_final > 0.9);
}

}
