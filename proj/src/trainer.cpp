#include "pgds/trainer.hpp"

#include <cmath>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "pgds/simd.hpp"

namespace pgds {

namespace {

std::string respond_with_retries(ModelBackend& backend, const PromptBundle& bundle, const TrainerConfig& cfg,
                                 std::string& fault) {
    for (int attempt = 0;; ++attempt) {
        try {
            return backend.respond(bundle);
        } catch (const BackendError& e) {
            fault = e.what();
            if (attempt >= cfg.max_retries) throw;
            if (cfg.backoff.count() > 0) std::this_thread::sleep_for(cfg.backoff * (1 << attempt));
        }
    }
}

}  // namespace

double update_baseline(const TrainerState& state, double r_prev) {
    return state.gamma * state.baseline + (1.0 - state.gamma) * r_prev;
}

void reinforce_update(TrainerState& state, std::span<const Episode> batch) {
    if (batch.empty()) return;
    const double n = static_cast<double>(batch.size());
    const std::size_t count = state.params.parameter_count();
    std::vector<double> delta(count, 0.0);
    double reward_sum = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Episode& ep = batch[i];
        if (!ep.grad.all_finite()) {
            throw RuntimeFailure("non-finite policy gradient in episode for query '" + ep.query_id + "'");
        }
        const std::vector<double> g = ep.grad.flatten();
        if (g.size() != count) throw ValidationError("gradient shape does not match the policy");
        simd::axpy(state.lr / n * (ep.reward.total - state.baseline), g.data(), delta.data(), count);
        reward_sum += ep.reward.total;
    }
    std::vector<double> theta = state.params.flatten();
    simd::axpy(1.0, delta.data(), theta.data(), count);
    PolicyParams next = state.params;
    next.assign_flat(theta);
    if (!next.all_finite()) throw RuntimeFailure("policy update produced non-finite parameters");
    state.params = std::move(next);
    state.baseline = update_baseline(state, reward_sum / n);
    ++state.step;
}

void TrainerConfig::validate() const {
    if (k == 0) throw ValidationError("k must be at least 1");
    if (m < k) throw ValidationError("candidate pool size m must be at least k");
    if (batch == 0) throw ValidationError("batch size must be at least 1");
    if (hidden == 0) throw ValidationError("hidden width must be at least 1");
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("learning rate must be positive");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("gamma must be in [0,1)");
    if (max_retries < 0) throw ValidationError("retries must be non-negative");
    weights.validate();
}

Json TrainerConfig::to_json() const {
    return {{"k", k},
            {"m", m},
            {"batch", batch},
            {"hidden", hidden},
            {"episodes", episodes},
            {"lr", lr},
            {"gamma", gamma},
            {"weights", {weights.format, weights.cls, weights.target, weights.explanation}},
            {"seed", seed},
            {"language", std::string(to_string(language))},
            {"strict_parse", strict_parse},
            {"retries", max_retries}};
}

TrainingResult run_training(const TrainerConfig& config, const DatasetSplit& dataset, const EmbeddingStore& store,
                            ModelBackend& backend, const TextScorer& scorer, const TrainingHooks& hooks,
                            std::optional<PolicyParams> initial) {
    config.validate();
    std::unordered_map<std::string, const Sample*> by_id;
    for (const Sample& s : dataset.samples) {
        if (!store.find(s.id)) throw ValidationError("store has no embedding for training sample '" + s.id + "'");
        by_id.emplace(s.id, &s);
    }

    TrainingResult result;
    TrainerState& state = result.state;
    state.gamma = config.gamma;
    state.lr = config.lr;
    state.batch_size = config.batch;
    state.seed = config.seed;
    if (initial) {
        if (initial->dim != store.dim()) throw ValidationError("initial policy dimension does not match the store");
        state.params = std::move(*initial);
    } else {
        state.params = init_params(store.dim(), config.hidden, config.seed);
    }
    if (dataset.samples.empty() || config.episodes == 0) return result;

    Rng order_rng(mix64(config.seed ^ 0x6f72646572ULL));
    Rng select_rng(mix64(config.seed ^ 0x73656c656374ULL));
    std::vector<std::size_t> order(dataset.samples.size());
    std::size_t cursor = order.size();

    std::vector<Episode> batch;
    std::size_t batch_faults = 0;
    double batch_entropy = 0.0;
    std::size_t batch_seen = 0;

    auto flush = [&] {
        if (batch.empty() && batch_seen == 0) return;
        double reward_sum = 0.0;
        for (const Episode& ep : batch) reward_sum += ep.reward.total;
        reinforce_update(state, batch);
        Json rec = {{"step", state.step},
                    {"episodes", result.episodes},
                    {"mean_reward", batch.empty() ? 0.0 : reward_sum / static_cast<double>(batch.size())},
                    {"baseline", state.baseline},
                    {"entropy", batch_seen == 0 ? 0.0 : batch_entropy / static_cast<double>(batch_seen)},
                    {"faults", batch_faults}};
        result.log.push_back(rec);
        if (hooks.on_log) hooks.on_log(rec);
        batch.clear();
        batch_faults = 0;
        batch_entropy = 0.0;
        batch_seen = 0;
    };

    while (result.episodes < config.episodes) {
        if (hooks.stop && hooks.stop->load()) {
            result.interrupted = true;
            break;
        }
        if (cursor == order.size()) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            order_rng.shuffle(order);
            cursor = 0;
        }
        const Sample& query = dataset.samples[order[cursor++]];

        const auto qrow = store.row(query.id);
        const std::vector<double> qvec(qrow.begin(), qrow.end());
        const auto candidates = retrieve_candidates(qrow, store, config.m, {query.id});
        if (candidates.size() < config.k) {
            throw ValidationError("only " + std::to_string(candidates.size()) + " candidates for k = " +
                                  std::to_string(config.k));
        }
        const CandidatePool pool = make_pool(store, candidates);
        const SelectionDistribution dist = score_candidates(state.params, qvec, pool);

        Episode ep;
        ep.query_id = query.id;
        ep.candidate_ids = pool.ids;
        ep.selected = sample_top_k(dist, config.k, select_rng);
        ep.entropy = dist.entropy();

        std::vector<Sample> demos;
        for (const auto& id : ep.selected.ids) {
            auto it = by_id.find(id);
            if (it == by_id.end()) throw ValidationError("candidate '" + id + "' is not in the training dataset");
            demos.push_back(*it->second);
        }
        const PromptBundle bundle = build_prompt(demos, query, config.language);

        std::string fault;
        std::optional<std::string> reply;
        try {
            reply = respond_with_retries(backend, bundle, config, fault);
        } catch (const BackendError&) {
            ep.fault = fault;
        }
        ++result.episodes;
        batch_entropy += ep.entropy;
        ++batch_seen;

        if (reply) {
            ep.response = parse_structured_output(*reply, config.strict_parse);
            ep.reward = compute_reward(ep.response ? &*ep.response : nullptr, query, config.weights, scorer);
            ep.grad = policy_log_prob_grad(state.params, qvec, pool, ep.selected.ids);
        } else {
            ++result.faults;
            ++batch_faults;
        }
        if (hooks.on_episode) hooks.on_episode(ep);
        if (reply) batch.push_back(std::move(ep));
        if (batch_seen == config.batch) flush();
    }
    if (!result.interrupted) flush();
    return result;
}

}  // namespace pgds
