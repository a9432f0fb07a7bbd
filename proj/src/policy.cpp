#include "pgds/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "pgds/simd.hpp"

namespace pgds {

namespace {

struct Forward {
    std::vector<double> z;  // n x hidden pre-activations
    std::vector<double> logits;
};

void check_dims(const PolicyParams& params, std::span<const double> query, const CandidatePool& pool) {
    if (query.size() != params.dim || pool.dim != params.dim) {
        throw ValidationError("policy: embedding dimension does not match the policy parameters");
    }
    if (pool.size() == 0) throw ValidationError("policy: empty candidate pool");
}

Forward forward(const PolicyParams& p, std::span<const double> query, const CandidatePool& pool) {
    const std::size_t n = pool.size(), h = p.hidden, d = p.dim;
    std::vector<double> zq(h);
    for (std::size_t j = 0; j < h; ++j) zq[j] = p.b1[j] + simd::dot(p.w1.data() + j * 2 * d, query.data(), d);
    Forward f;
    f.z.resize(n * h);
    f.logits.resize(n);
    std::vector<double> act(h);
    for (std::size_t i = 0; i < n; ++i) {
        const double* x = pool.features.data() + i * d;
        double* zi = f.z.data() + i * h;
        for (std::size_t j = 0; j < h; ++j) {
            zi[j] = zq[j] + simd::dot(p.w1.data() + j * 2 * d + d, x, d);
            act[j] = zi[j] > 0.0 ? zi[j] : 0.0;
        }
        f.logits[i] = simd::dot(p.w2.data(), act.data(), h) + p.b2;
    }
    return f;
}

std::vector<std::size_t> resolve_ids(const std::vector<std::string>& pool_ids, std::span<const std::string> ids) {
    std::unordered_map<std::string_view, std::size_t> pos;
    for (std::size_t i = 0; i < pool_ids.size(); ++i) pos.emplace(pool_ids[i], i);
    std::vector<std::size_t> out;
    std::vector<bool> used(pool_ids.size(), false);
    for (const auto& id : ids) {
        auto it = pos.find(id);
        if (it == pos.end()) throw ValidationError("selection id '" + id + "' is not in the candidate pool");
        if (used[it->second]) throw ValidationError("selection id '" + id + "' appears twice");
        used[it->second] = true;
        out.push_back(it->second);
    }
    return out;
}

// Sum of probs over positions not yet drawn, in index order.
double remaining_mass(std::span<const double> probs, const std::vector<bool>& drawn) {
    double mass = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!drawn[i]) mass += probs[i];
    }
    return mass;
}

template <class T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

PolicyParams PolicyParams::zeros(std::size_t dim, std::size_t hidden) {
    PolicyParams p;
    p.dim = dim;
    p.hidden = hidden;
    p.w1.assign(hidden * 2 * dim, 0.0);
    p.b1.assign(hidden, 0.0);
    p.w2.assign(hidden, 0.0);
    p.b2 = 0.0;
    return p;
}

std::vector<double> PolicyParams::flatten() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    flat.insert(flat.end(), w1.begin(), w1.end());
    flat.insert(flat.end(), b1.begin(), b1.end());
    flat.insert(flat.end(), w2.begin(), w2.end());
    flat.push_back(b2);
    return flat;
}

void PolicyParams::assign_flat(std::span<const double> flat) {
    if (flat.size() != parameter_count()) throw ValidationError("assign_flat: size mismatch");
    auto it = flat.begin();
    std::copy_n(it, w1.size(), w1.begin());
    it += static_cast<std::ptrdiff_t>(w1.size());
    std::copy_n(it, b1.size(), b1.begin());
    it += static_cast<std::ptrdiff_t>(b1.size());
    std::copy_n(it, w2.size(), w2.begin());
    it += static_cast<std::ptrdiff_t>(w2.size());
    b2 = *it;
}

bool PolicyParams::all_finite() const {
    auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    return finite(w1) && finite(b1) && finite(w2) && std::isfinite(b2);
}

PolicyParams init_params(std::size_t dim, std::size_t hidden, std::uint64_t seed) {
    if (dim == 0 || hidden == 0) throw ValidationError("init_params: dim and hidden must be positive");
    PolicyParams p = PolicyParams::zeros(dim, hidden);
    Rng rng(seed);
    const double lim1 = std::sqrt(6.0 / static_cast<double>(2 * dim + hidden));
    const double lim2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
    for (double& w : p.w1) w = rng.uniform(-lim1, lim1);
    for (double& w : p.w2) w = rng.uniform(-lim2, lim2);
    return p;
}

void CandidatePool::add(std::string id, std::span<const float> values) {
    if (ids.empty() && dim == 0) dim = values.size();
    if (values.size() != dim) throw ValidationError("candidate pool: dimension mismatch for '" + id + "'");
    features.insert(features.end(), values.begin(), values.end());
    ids.push_back(std::move(id));
}

void CandidatePool::add(std::string id, std::span<const double> values) {
    if (ids.empty() && dim == 0) dim = values.size();
    if (values.size() != dim) throw ValidationError("candidate pool: dimension mismatch for '" + id + "'");
    features.insert(features.end(), values.begin(), values.end());
    ids.push_back(std::move(id));
}

CandidatePool make_pool(const EmbeddingStore& store, const std::vector<Candidate>& candidates) {
    CandidatePool pool;
    pool.dim = store.dim();
    pool.features.reserve(candidates.size() * store.dim());
    for (const Candidate& c : candidates) pool.add(c.id, store.row(c.row));
    return pool;
}

double SelectionDistribution::entropy() const {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.size());
    if (logits.empty()) return out;
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

SelectionDistribution score_candidates(const PolicyParams& params, std::span<const double> query,
                                       const CandidatePool& pool) {
    check_dims(params, query, pool);
    Forward f = forward(params, query, pool);
    SelectionDistribution dist;
    dist.candidate_ids = pool.ids;
    dist.probs = softmax(f.logits);
    dist.logits = std::move(f.logits);
    return dist;
}

double plackett_luce_log_prob(std::span<const double> probs, std::span<const std::size_t> order) {
    std::vector<bool> drawn(probs.size(), false);
    double log_prob = 0.0;
    for (std::size_t idx : order) {
        log_prob += std::log(probs[idx] / remaining_mass(probs, drawn));
        drawn[idx] = true;
    }
    return log_prob;
}

SelectedSet sample_top_k(const SelectionDistribution& dist, std::size_t k, Rng& rng) {
    const std::size_t n = dist.size();
    if (k == 0 || k > n) throw ValidationError("sample_top_k: k must be in [1, pool size]");
    std::vector<bool> drawn(n, false);
    SelectedSet out;
    for (std::size_t step = 0; step < k; ++step) {
        const double mass = remaining_mass(dist.probs, drawn);
        const double u = rng.uniform() * mass;
        double cum = 0.0;
        std::size_t pick = n;
        std::size_t last_open = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (drawn[i]) continue;
            last_open = i;
            cum += dist.probs[i];
            if (u < cum) {
                pick = i;
                break;
            }
        }
        if (pick == n) pick = last_open;  // u landed on the rounding slack at the top
        drawn[pick] = true;
        out.indices.push_back(pick);
        out.ids.push_back(dist.candidate_ids[pick]);
    }
    out.log_prob = plackett_luce_log_prob(dist.probs, out.indices);
    return out;
}

SelectedSet greedy_top_k(const SelectionDistribution& dist, std::size_t k) {
    const std::size_t n = dist.size();
    if (k == 0 || k > n) throw ValidationError("greedy_top_k: k must be in [1, pool size]");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist.probs[a] > dist.probs[b]; });
    SelectedSet out;
    out.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    for (std::size_t i : out.indices) out.ids.push_back(dist.candidate_ids[i]);
    out.log_prob = plackett_luce_log_prob(dist.probs, out.indices);
    return out;
}

double selection_log_prob(const SelectionDistribution& dist, std::span<const std::string> ordered_ids) {
    const auto order = resolve_ids(dist.candidate_ids, ordered_ids);
    return plackett_luce_log_prob(dist.probs, order);
}

PolicyGradient policy_log_prob_grad(const PolicyParams& params, std::span<const double> query,
                                    const CandidatePool& pool, std::span<const std::string> ordered_ids) {
    check_dims(params, query, pool);
    const std::size_t n = pool.size(), h = params.hidden, d = params.dim;
    const auto order = resolve_ids(pool.ids, ordered_ids);
    const Forward f = forward(params, query, pool);
    const std::vector<double> probs = softmax(f.logits);

    // d log pi / d logit_i = sum over draws j of [i == s_j] - [i open at j] p_i / mass_j
    std::vector<double> g_logit(n, 0.0);
    std::vector<bool> drawn(n, false);
    for (std::size_t s : order) {
        const double mass = remaining_mass(probs, drawn);
        for (std::size_t i = 0; i < n; ++i) {
            if (!drawn[i]) g_logit[i] -= probs[i] / mass;
        }
        g_logit[s] += 1.0;
        drawn[s] = true;
    }

    PolicyGradient grad = PolicyParams::zeros(d, h);
    std::vector<double> dz_sum(h, 0.0);
    std::vector<double> act(h);
    for (std::size_t i = 0; i < n; ++i) {
        const double gi = g_logit[i];
        if (gi == 0.0) continue;
        const double* zi = f.z.data() + i * h;
        const double* x = pool.features.data() + i * d;
        grad.b2 += gi;
        for (std::size_t j = 0; j < h; ++j) act[j] = zi[j] > 0.0 ? zi[j] : 0.0;
        simd::axpy(gi, act.data(), grad.w2.data(), h);
        for (std::size_t j = 0; j < h; ++j) {
            if (zi[j] <= 0.0) continue;  // ReLU subgradient at 0 is 0
            const double dz = gi * params.w2[j];
            dz_sum[j] += dz;
            simd::axpy(dz, x, grad.w1.data() + j * 2 * d + d, d);
        }
    }
    for (std::size_t j = 0; j < h; ++j) {
        grad.b1[j] = dz_sum[j];
        if (dz_sum[j] != 0.0) simd::axpy(dz_sum[j], query.data(), grad.w1.data() + j * 2 * d, d);
    }
    return grad;
}

void save_checkpoint(const PolicyParams& params, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot write '" + path.string() + "'");
    out.write("PGDS", 4);
    write_pod(out, static_cast<std::uint32_t>(params.dim));
    write_pod(out, static_cast<std::uint32_t>(params.hidden));
    for (double v : params.flatten()) write_pod(out, v);
    if (!out) throw RuntimeFailure("write failed for '" + path.string() + "'");
}

PolicyParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint '" + path.string() + "'");
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "PGDS", 4) != 0) {
        throw ValidationError("'" + path.string() + "' is not a PGDS checkpoint");
    }
    std::uint32_t dim = 0, hidden = 0;
    in.read(reinterpret_cast<char*>(&dim), 4);
    in.read(reinterpret_cast<char*>(&hidden), 4);
    if (!in || dim == 0 || hidden == 0) throw ValidationError("invalid checkpoint header");
    PolicyParams p = PolicyParams::zeros(dim, hidden);
    std::vector<double> flat(p.parameter_count());
    in.read(reinterpret_cast<char*>(flat.data()), static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != flat.size() * sizeof(double)) {
        throw ValidationError("truncated checkpoint '" + path.string() + "'");
    }
    p.assign_flat(flat);
    return p;
}

}  // namespace pgds
