#include "pgds/mock_env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pgds/common.hpp"
#include "pgds/prompt.hpp"

namespace pgds {

namespace {

std::string padded(char prefix, std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%05zu", prefix, n);
    return buf;
}

int concept_label(std::uint64_t seed, std::size_t c) { return static_cast<int>(mix64(seed ^ mix64(c + 1)) & 1); }

Sample make_sample(std::string id, std::string role, std::size_t surface, long long concept_id, int label) {
    Sample s;
    s.id = std::move(id);
    s.text = role + " sample on surface " + std::to_string(surface);
    s.label = label;
    if (label == 1) {
        s.target = "topic-" + std::to_string(concept_id);
        s.explanation = "the caption mocks topic " + std::to_string(concept_id) + " by contrast with the image";
    }
    s.extra["role"] = std::move(role);
    s.extra["surface"] = std::to_string(surface);
    s.extra["concept"] = std::to_string(concept_id);
    return s;
}

std::vector<double> embedding(const MockEnvironmentConfig& cfg, std::size_t surface, long long concept_id) {
    std::vector<double> v(cfg.dim(), 0.0);
    v[surface] = 1.0;
    if (concept_id >= 0 && static_cast<std::size_t>(concept_id) < cfg.concept_count) {
        v[cfg.surface_dim() + static_cast<std::size_t>(concept_id)] = cfg.concept_feature_scale;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

}  // namespace

void MockEnvironmentConfig::validate() const {
    if (concept_count == 0 || query_surfaces < 2) throw ValidationError("mock world needs concepts and >= 2 query surfaces");
    if (heldout_per_concept >= query_surfaces) {
        throw ValidationError("held-out queries per concept must be fewer than the query surfaces");
    }
    if (!(concept_feature_scale >= 0.0) || !std::isfinite(concept_feature_scale)) {
        throw ValidationError("concept feature scale must be finite and non-negative");
    }
    if (!(noise_level >= 0.0 && noise_level <= 1.0)) throw ValidationError("noise level must be in [0,1]");
}

Json MockEnvironmentConfig::to_json() const {
    return {{"concept_count", concept_count},
            {"query_surfaces", query_surfaces},
            {"heldout_per_concept", heldout_per_concept},
            {"background_count", background_count},
            {"concept_feature_scale", concept_feature_scale},
            {"noise_level", noise_level},
            {"seed", seed}};
}

MockWorld generate_mock_dataset(const MockEnvironmentConfig& cfg) {
    cfg.validate();
    MockWorld w;
    w.train.name = "train";
    w.heldout.name = "test";
    w.train_store = EmbeddingStore(cfg.dim());
    w.heldout_store = EmbeddingStore(cfg.dim());
    Rng rng(mix64(cfg.seed ^ 0x6d6f636bULL));

    const std::size_t C = cfg.concept_count, Q = cfg.query_surfaces;
    const std::size_t background_surface = Q + C;
    std::size_t next = 0;
    auto add_train = [&](Sample s, std::size_t surface, long long concept_id) {
        const auto v = embedding(cfg, surface, concept_id);
        w.train_store.add(s.id, std::span<const double>(v));
        w.concepts[s.id] = concept_id;
        w.train.samples.push_back(std::move(s));
    };

    for (std::size_t j = 0; j < cfg.background_count; ++j) {
        const auto concept_id = static_cast<long long>(C + j);  // never shared
        add_train(make_sample(padded('t', next++), "background", background_surface, concept_id, 0), background_surface,
                  concept_id);
    }
    for (std::size_t c = 0; c < C; ++c) {
        const auto cc = static_cast<long long>(c);
        add_train(make_sample(padded('t', next++), "exemplar", Q + c, cc, concept_label(cfg.seed, c)), Q + c, cc);
    }
    for (std::size_t c = 0; c < C; ++c) {
        const auto cc = static_cast<long long>(c);
        add_train(make_sample(padded('t', next++), "query", c % Q, cc, concept_label(cfg.seed, c)), c % Q, cc);
    }

    std::size_t held = 0;
    for (std::size_t c = 0; c < C; ++c) {
        std::vector<std::size_t> others;
        for (std::size_t s = 0; s < Q; ++s) {
            if (s != c % Q) others.push_back(s);
        }
        rng.shuffle(others);
        for (std::size_t i = 0; i < cfg.heldout_per_concept; ++i) {
            const auto cc = static_cast<long long>(c);
            Sample s = make_sample(padded('h', held++), "query", others[i], cc, concept_label(cfg.seed, c));
            const auto v = embedding(cfg, others[i], cc);
            w.heldout_store.add(s.id, std::span<const double>(v));
            w.concepts[s.id] = cc;
            w.heldout.samples.push_back(std::move(s));
        }
    }
    return w;
}

ConceptMap concept_map(const std::vector<const DatasetSplit*>& splits) {
    ConceptMap out;
    for (const DatasetSplit* split : splits) {
        for (const Sample& s : split->samples) {
            auto it = s.extra.find("concept");
            if (it == s.extra.end()) throw ValidationError("sample '" + s.id + "' has no hidden concept");
            long long v = 0;
            try {
                std::size_t used = 0;
                v = std::stoll(it->second, &used);
                if (used != it->second.size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw ValidationError("sample '" + s.id + "' has a non-integer concept");
            }
            out[s.id] = v;
        }
    }
    return out;
}

bool has_golden(const ConceptMap& concepts, const std::string& query_id, const std::vector<std::string>& demo_ids) {
    auto q = concepts.find(query_id);
    if (q == concepts.end()) return false;
    return std::any_of(demo_ids.begin(), demo_ids.end(), [&](const std::string& id) {
        auto d = concepts.find(id);
        return d != concepts.end() && d->second == q->second;
    });
}

MockOracle::MockOracle(const MockEnvironmentConfig& cfg, const std::vector<const DatasetSplit*>& splits)
    : seed_(cfg.seed), noise_level_(cfg.noise_level), concepts_(concept_map(splits)) {
    cfg.validate();
    for (const DatasetSplit* split : splits) {
        for (const Sample& s : split->samples) samples_.emplace(s.id, s);
    }
}

const Sample& MockOracle::lookup(const std::string& id) const {
    auto it = samples_.find(id);
    if (it == samples_.end()) throw ValidationError("mock oracle: unknown sample id '" + id + "'");
    return it->second;
}

std::string MockOracle::respond(const PromptBundle& bundle) {
    const Sample& query = lookup(bundle.query_id);
    for (const auto& id : bundle.demo_ids) lookup(id);
    if (!query.label) throw ValidationError("mock oracle: query '" + query.id + "' has no label");

    bool correct = has_golden(concepts_, query.id, bundle.demo_ids);
    if (!correct && noise_level_ > 0.0) {
        std::vector<std::string> sorted = bundle.demo_ids;
        std::sort(sorted.begin(), sorted.end());
        std::uint64_t h = hash_bytes(query.id, seed_);
        for (const auto& id : sorted) h = hash_bytes(id, h);
        const double u = static_cast<double>(mix64(h) >> 11) * 0x1.0p-53;
        correct = u < noise_level_;
    }
    if (correct) {
        return render_tagged(*query.label == 1, query.target.value_or(""), query.explanation.value_or(""),
                             bundle.language);
    }
    const long long concept_id = concepts_.at(query.id);
    if (*query.label == 1) return render_tagged(false, "", "", bundle.language);
    return render_tagged(true, "decoy-" + std::to_string(concept_id),
                         "a misread of sample " + query.id + " as mocking something", bundle.language);
}

}  // namespace pgds
