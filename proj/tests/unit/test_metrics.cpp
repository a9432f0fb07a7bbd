#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pgds/metrics.hpp"
#include "pgds/prompt.hpp"
#include "support.hpp"

using namespace pgds;

namespace {

class ListScorer final : public TextScorer {
  public:
    explicit ListScorer(std::map<std::string, double> v) : values(std::move(v)) {}
    std::map<std::string, double> values;  // keyed by predicted text
    double score(std::string_view pred, std::string_view) const override {
        auto it = values.find(std::string(pred));
        return it == values.end() ? 0.0 : it->second;
    }
};

class ExactScorer final : public TextScorer {
  public:
    double score(std::string_view a, std::string_view b) const override { return a == b ? 1.0 : 0.0; }
};

class AxisProvider final : public EmbeddingProvider {
  public:
    std::size_t text_dim() const override { return 2; }
    std::size_t image_dim() const override { return 1; }
    EmbeddingVector embed_text(std::string_view t) const override {
        if (t == "x") return {1, 0};
        if (t == "y") return {0, 1};
        if (t == "-x") return {-1, 0};
        return {1, 1};
    }
    std::optional<EmbeddingVector> sample_image(const Sample&) const override { return std::nullopt; }
};

Sample labeled(const std::string& id, int label, std::string target = "", std::string exp = "") {
    Sample s;
    s.id = id;
    s.label = label;
    if (label == 1) {
        s.target = target;
        s.explanation = exp;
    }
    return s;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("classification from confusion counts") {
    ConfusionCounts c{.tp = 3, .fp = 1, .tn = 4, .fn = 2};
    const auto r = classification_metrics(c);
    CHECK(r.accuracy == doctest::Approx(0.7));
    CHECK(r.precision == doctest::Approx(0.75));
    CHECK(r.recall == doctest::Approx(0.6));
    CHECK(r.f1_positive == doctest::Approx(2 * 0.75 * 0.6 / 1.35));
    const double f1n = 2 * (4.0 / 6) * (0.8) / (4.0 / 6 + 0.8);
    CHECK(r.f1_macro == doctest::Approx((r.f1_positive + f1n) / 2));

    const auto perfect = classification_metrics(ConfusionCounts{.tp = 5, .tn = 5});
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.f1_macro == 1.0);

    const auto none = classification_metrics(ConfusionCounts{.tn = 3, .fn = 2});
    CHECK(none.precision == 0.0);
    CHECK(none.recall == 0.0);
    CHECK(none.f1_positive == 0.0);
    CHECK_THROWS_AS(classification_metrics(ConfusionCounts{}), ValidationError);
}

TEST_CASE("paper operating points") {
    // Smallest counts reproducing the rounded precision and recall.
    for (auto [P, R, F] : {std::tuple{0.6067, 0.9630, 0.7444}, std::tuple{0.7008, 0.8641, 0.7739}}) {
        bool found = false;
        for (int tp = 1; tp < 3000 && !found; ++tp) {
            const int fp = static_cast<int>(std::lround(tp / P)) - tp;
            const int fn = static_cast<int>(std::lround(tp / R)) - tp;
            if (fp < 0 || fn < 0) continue;
            const double p = double(tp) / (tp + fp), r = double(tp) / (tp + fn);
            if (std::fabs(p - P) > 5e-5 || std::fabs(r - R) > 5e-5) continue;
            found = true;
            const auto rep = classification_metrics(ConfusionCounts{.tp = std::size_t(tp), .fp = std::size_t(fp),
                                                                    .tn = 100, .fn = std::size_t(fn)});
            CHECK(std::fabs(rep.f1_positive - F) <= 1e-4);
        }
        CHECK(found);
    }
}

TEST_CASE("permutation invariance") {
    Rng rng(4);
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < 100; ++i) pairs.emplace_back(int(rng.below(2)), int(rng.below(2)));
    const auto a = classification_metrics(pairs);
    rng.shuffle(pairs);
    const auto b = classification_metrics(pairs);
    CHECK(a.f1_macro == b.f1_macro);
    CHECK(a.accuracy == b.accuracy);
    CHECK_THROWS_AS(classification_metrics(std::vector<std::pair<int, int>>{{2, 0}}), ValidationError);
}

TEST_CASE("target accuracy") {
    const ListScorer sc({{"a", 0.9}, {"b", 0.5}, {"c", 0.71}});
    std::vector<std::pair<std::string, std::string>> pairs{{"a", "ga"}, {"b", "gb"}, {"c", "gc"}};
    CHECK(*target_accuracy(pairs, sc) == doctest::Approx(2.0 / 3));
    std::reverse(pairs.begin(), pairs.end());
    CHECK(*target_accuracy(pairs, sc) == doctest::Approx(2.0 / 3));
    CHECK_FALSE(target_accuracy({}, sc));
    const ListScorer zero({});
    CHECK(*target_accuracy(std::vector<std::pair<std::string, std::string>>{{"p", "q"}}, zero) == 0.0);
    CHECK(*target_accuracy(std::vector<std::pair<std::string, std::string>>{{" the  boss", "the boss "}}, zero) == 1.0);
    // At the threshold counts as a hit.
    const ListScorer edge({{"e", 0.7}});
    CHECK(*target_accuracy(std::vector<std::pair<std::string, std::string>>{{"e", "g"}}, edge) == 1.0);
}

TEST_CASE("tokenization") {
    CHECK(tokenize("贫富 差距", Tokenization::Char) == std::vector<std::string>{"贫", "富", "差", "距"});
    CHECK(tokenize("a　b", Tokenization::Char) == std::vector<std::string>{"a", "b"});
    CHECK(tokenize("  the cat\tsat ", Tokenization::Whitespace) == std::vector<std::string>{"the", "cat", "sat"});
    CHECK_THROWS_AS(parse_tokenization("bpe"), ValidationError);
}

TEST_CASE("bleu against an independent oracle") {
    Rng rng(17);
    const std::vector<std::string> vocab{"a", "b", "c", "d", "e", "讽", "刺"};
    for (int t = 0; t < 200; ++t) {
        auto sentence = [&](std::size_t maxlen) {
            std::string s;
            const auto n = rng.below(maxlen + 1);
            for (std::uint64_t i = 0; i < n; ++i) s += vocab[rng.below(vocab.size())] + " ";
            return s;
        };
        const std::string hyp = sentence(12);
        std::vector<std::string> refs{sentence(12)};
        if (t % 3 == 0) refs.push_back(sentence(12));
        const auto mode = t % 2 ? Tokenization::Char : Tokenization::Whitespace;
        std::vector<std::vector<std::string>> ref_tokens;
        for (const auto& r : refs) ref_tokens.push_back(tokenize(r, mode));
        CHECK(std::fabs(bleu4(hyp, refs, mode) - testing::bleu4_oracle(tokenize(hyp, mode), ref_tokens)) < 1e-9);
    }
    const std::string refs[] = {"the cat sat on the mat"};
    CHECK(bleu4("the cat sat on the mat", refs, Tokenization::Whitespace) == doctest::Approx(1.0));
    CHECK(bleu4("", refs) == 0.0);
    // More matching n-grams never lower the score at equal length.
    const double worse = bleu4("the dog sat on a mat", refs, Tokenization::Whitespace);
    const double better = bleu4("the cat sat on a mat", refs, Tokenization::Whitespace);
    CHECK(better > worse);
}

TEST_CASE("semantic score") {
    const AxisProvider p;
    CHECK(semantic_score("same", "same", p) == 1.0);
    CHECK(semantic_score("x", "y", p) == 0.0);
    CHECK(semantic_score("x", "-x", p) == 0.0);
    CHECK(semantic_score("x", "other", p) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("report with no predictions") {
    DatasetSplit gold;
    gold.samples = {labeled("a", 1, "t", "e")};
    const ExactScorer sc;
    const auto r = build_report(gold, {}, sc);
    CHECK(r.evaluated == 0);
    CHECK_FALSE(r.classification);
    const Json j = r.to_json();
    CHECK(j["f1_macro"] == "no data");
    CHECK(j["target_accuracy"] == "no data");
    CHECK(j["bleu4"] == "no data");
    CHECK(j["evaluated"] == 0);
}

TEST_CASE("perfect predictions") {
    DatasetSplit gold;
    std::vector<Prediction> preds;
    for (int i = 0; i < 10; ++i) {
        const int label = i % 2;
        gold.samples.push_back(labeled("s" + std::to_string(i), label, "target number " + std::to_string(i),
                                       "because of reason number " + std::to_string(i)));
        const auto& g = gold.samples.back();
        preds.push_back({g.id, render_tagged(label == 1, g.target.value_or(""), g.explanation.value_or(""))});
    }
    const ExactScorer sc;
    const auto r = build_report(gold, preds, sc);
    CHECK(r.classification->accuracy == 1.0);
    CHECK(r.classification->f1_macro == 1.0);
    CHECK(*r.target_accuracy == 1.0);
    CHECK(*r.bleu4 == doctest::Approx(1.0));
    CHECK(*r.semantic_score_mean == 1.0);
    CHECK(r.positives == 5);
}

TEST_CASE("mixed outcomes match a hand tally") {
    DatasetSplit gold;
    gold.samples = {labeled("p1", 1, "boss", "long hours"), labeled("p2", 1, "rain", "sunny caption"),
                    labeled("p3", 1, "price", "cheap claim"), labeled("n1", 0), labeled("n2", 0)};
    const std::vector<Prediction> preds{
        {"p1", render_tagged(true, "boss", "long hours")},  // tp, exact
        {"p2", render_tagged(true, "weather", "x")},        // tp, wrong fields
        {"p3", "unreadable"},                               // counted as fn
        {"n1", render_tagged(false, "", "")},               // tn
        {"n2", render_tagged(true, "a", "b")},              // fp
    };
    const ExactScorer sc;
    const auto r = build_report(gold, preds, sc);
    CHECK(r.unparseable == 1);
    CHECK(r.confusion == ConfusionCounts{.tp = 2, .fp = 1, .tn = 1, .fn = 1});
    CHECK(r.classification->accuracy == doctest::Approx(0.6));
    CHECK(*r.target_accuracy == doctest::Approx(1.0 / 3));
    const std::string ref2[] = {"sunny caption"};
    const double b2 = bleu4("x", ref2);
    CHECK(*r.bleu4 == doctest::Approx((1.0 + b2 + 0.0) / 3));
    CHECK(*r.semantic_score_mean == doctest::Approx(1.0 / 3));
}

TEST_CASE("id mismatches are rejected") {
    DatasetSplit gold;
    gold.samples = {labeled("a", 0), Sample{.id = "u"}};
    const ExactScorer sc;
    CHECK_THROWS_AS(build_report(gold, std::vector<Prediction>{{"zz", "x"}}, sc), ValidationError);
    CHECK_THROWS_AS(build_report(gold, std::vector<Prediction>{{"a", "x"}, {"a", "y"}}, sc), ValidationError);
    CHECK_THROWS_AS(build_report(gold, std::vector<Prediction>{{"u", "x"}}, sc), ValidationError);
}

}
