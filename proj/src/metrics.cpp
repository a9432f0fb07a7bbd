#include "pgds/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "pgds/common.hpp"
#include "pgds/prompt.hpp"

namespace pgds {

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

std::string collapse_ws(std::string_view s) {
    std::string out;
    bool pending = false;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            pending = !out.empty();
            continue;
        }
        if (pending) out.push_back(' ');
        pending = false;
        out.push_back(c);
    }
    return out;
}

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(const std::vector<std::string>& toks, std::size_t n) {
    NgramCounts counts;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
        ++counts[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                          toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return counts;
}

Json metric_or_marker(const std::optional<double>& v) { return v ? Json(*v) : Json("no data"); }

}  // namespace

void ConfusionCounts::add(int predicted, int gold) {
    if ((predicted != 0 && predicted != 1) || (gold != 0 && gold != 1)) {
        throw ValidationError("classification labels must be 0 or 1");
    }
    if (gold == 1) (predicted == 1 ? tp : fn)++;
    else (predicted == 1 ? fp : tn)++;
}

ClassificationReport classification_metrics(const ConfusionCounts& c) {
    if (c.total() == 0) throw ValidationError("classification_metrics: no predictions");
    ClassificationReport r;
    r.accuracy = ratio(c.tp + c.tn, c.total());
    r.precision = ratio(c.tp, c.tp + c.fp);
    r.recall = ratio(c.tp, c.tp + c.fn);
    r.f1_positive = harmonic(r.precision, r.recall);
    const double f1_negative = harmonic(ratio(c.tn, c.tn + c.fn), ratio(c.tn, c.tn + c.fp));
    r.f1_macro = 0.5 * (r.f1_positive + f1_negative);
    return r;
}

ClassificationReport classification_metrics(std::span<const std::pair<int, int>> pairs) {
    ConfusionCounts c;
    for (const auto& [pred, gold] : pairs) c.add(pred, gold);
    return classification_metrics(c);
}

double EmbeddingScorer::score(std::string_view predicted, std::string_view gold) const {
    return semantic_score(predicted, gold, provider_);
}

double semantic_score(std::string_view predicted, std::string_view gold, const EmbeddingProvider& provider) {
    if (predicted == gold) return 1.0;
    const EmbeddingVector a = provider.embed_text(predicted);
    const EmbeddingVector b = provider.embed_text(gold);
    return std::clamp(cosine_similarity(a, b), 0.0, 1.0);
}

std::optional<double> target_accuracy(std::span<const std::pair<std::string, std::string>> pairs,
                                      const TextScorer& scorer, double threshold) {
    if (pairs.empty()) return std::nullopt;
    std::size_t hits = 0;
    for (const auto& [pred, gold] : pairs) {
        if (collapse_ws(pred) == collapse_ws(gold) || scorer.score(pred, gold) >= threshold) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

Tokenization parse_tokenization(std::string_view name) {
    if (name == "char") return Tokenization::Char;
    if (name == "whitespace") return Tokenization::Whitespace;
    throw ValidationError("unknown tokenization '" + std::string(name) + "' (expected char or whitespace)");
}

std::vector<std::string> tokenize(std::string_view text, Tokenization mode) {
    std::vector<std::string> toks;
    const auto ascii_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    if (mode == Tokenization::Whitespace) {
        std::string cur;
        for (char c : text) {
            if (ascii_ws(c)) {
                if (!cur.empty()) toks.push_back(std::move(cur));
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) toks.push_back(std::move(cur));
        return toks;
    }
    std::size_t i = 0;
    while (i < text.size()) {
        const auto lead = static_cast<unsigned char>(text[i]);
        std::size_t len = lead >= 0xF0 ? 4 : lead >= 0xE0 ? 3 : lead >= 0xC0 ? 2 : 1;
        len = std::min(len, text.size() - i);
        const std::string_view cp = text.substr(i, len);
        i += len;
        if (len == 1 && ascii_ws(cp[0])) continue;
        if (cp == "\xE3\x80\x80") continue;  // ideographic space
        toks.emplace_back(cp);
    }
    return toks;
}

double bleu4(std::string_view hypothesis, std::span<const std::string> references, Tokenization mode) {
    const auto hyp = tokenize(hypothesis, mode);
    if (hyp.empty()) return 0.0;
    std::vector<std::vector<std::string>> refs;
    for (const auto& r : references) refs.push_back(tokenize(r, mode));

    double log_sum = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        const NgramCounts h = ngrams(hyp, n);
        NgramCounts max_ref;
        for (const auto& r : refs) {
            for (const auto& [g, c] : ngrams(r, n)) max_ref[g] = std::max(max_ref[g], c);
        }
        std::size_t clipped = 0, total = 0;
        for (const auto& [g, c] : h) {
            total += c;
            auto it = max_ref.find(g);
            if (it != max_ref.end()) clipped += std::min(c, it->second);
        }
        const double p = clipped > 0 ? static_cast<double>(clipped) / static_cast<double>(total)
                                     : 1.0 / (2.0 * static_cast<double>(total) + 1.0);
        log_sum += std::log(p);
    }

    const std::size_t c = hyp.size();
    std::size_t r = 0;
    bool have_ref = false;
    for (const auto& ref : refs) {
        const std::size_t len = ref.size();
        const auto dist = [c](std::size_t l) { return l > c ? l - c : c - l; };
        if (!have_ref || dist(len) < dist(r) || (dist(len) == dist(r) && len < r)) r = len;
        have_ref = true;
    }
    const double bp = c < r ? std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c)) : 1.0;
    return bp * std::exp(log_sum / 4.0);
}

Json EvalReport::to_json() const {
    Json j;
    j["evaluated"] = evaluated;
    j["unparseable"] = unparseable;
    j["tp"] = confusion.tp;
    j["fp"] = confusion.fp;
    j["tn"] = confusion.tn;
    j["fn"] = confusion.fn;
    const auto cls = [this](double ClassificationReport::*field) -> std::optional<double> {
        if (!classification) return std::nullopt;
        return (*classification).*field;
    };
    j["accuracy"] = metric_or_marker(cls(&ClassificationReport::accuracy));
    j["precision"] = metric_or_marker(cls(&ClassificationReport::precision));
    j["recall"] = metric_or_marker(cls(&ClassificationReport::recall));
    j["f1_positive"] = metric_or_marker(cls(&ClassificationReport::f1_positive));
    j["f1_macro"] = metric_or_marker(cls(&ClassificationReport::f1_macro));
    j["positives"] = positives;
    j["target_accuracy"] = metric_or_marker(target_accuracy);
    j["bleu4"] = metric_or_marker(bleu4);
    j["semantic_score_mean"] = metric_or_marker(semantic_score_mean);
    return j;
}

EvalReport build_report(const DatasetSplit& gold, std::span<const Prediction> predictions, const TextScorer& scorer,
                        const EvalOptions& options) {
    std::unordered_map<std::string, const Sample*> by_id;
    for (const Sample& s : gold.samples) by_id.emplace(s.id, &s);

    EvalReport report;
    std::unordered_set<std::string> seen;
    std::vector<std::pair<std::string, std::string>> target_pairs;
    double bleu_sum = 0.0, sem_sum = 0.0;
    std::size_t gen_count = 0;
    const ResponseParser parser(options.strict_parse);

    for (const Prediction& p : predictions) {
        auto it = by_id.find(p.id);
        if (it == by_id.end()) throw ValidationError("prediction for unknown id '" + p.id + "'");
        if (!seen.insert(p.id).second) throw ValidationError("duplicate prediction for id '" + p.id + "'");
        const Sample& g = *it->second;
        if (!g.label) throw ValidationError("gold sample '" + p.id + "' has no label");

        const auto parsed = parser.parse(p.raw);
        if (!parsed) ++report.unparseable;
        const int predicted = parsed ? parsed->label() : 1 - *g.label;
        report.confusion.add(predicted, *g.label);
        ++report.evaluated;

        if (*g.label != 1) continue;
        ++report.positives;
        const std::string pred_target = parsed ? parsed->target() : std::string();
        const std::string pred_exp = parsed ? parsed->explanation() : std::string();
        if (g.target) target_pairs.emplace_back(pred_target, *g.target);
        if (g.explanation) {
            const std::string refs[] = {*g.explanation};
            bleu_sum += bleu4(pred_exp, refs, options.tokenization);
            sem_sum += scorer.score(pred_exp, *g.explanation);
            ++gen_count;
        }
    }

    if (report.evaluated > 0) report.classification = classification_metrics(report.confusion);
    report.target_accuracy = target_accuracy(target_pairs, scorer, options.threshold);
    if (gen_count > 0) {
        report.bleu4 = bleu_sum / static_cast<double>(gen_count);
        report.semantic_score_mean = sem_sum / static_cast<double>(gen_count);
    }
    return report;
}

}  // namespace pgds
