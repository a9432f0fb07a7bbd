#include <doctest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "pgds/cli.hpp"
#include "pgds/core_data.hpp"
#include "pgds/mock_env.hpp"
#include "pgds/policy.hpp"
#include "pgds/prompt.hpp"
#include "support.hpp"

using namespace pgds;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "pgds");
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> small_mock(const std::filesystem::path& dir) {
    return {"mock-run", "--out-dir", dir.string(), "--concepts", "6",       "--query-surfaces", "3",
            "--heldout", "1",       "--background", "4",   "--episodes", "64", "--hidden", "8",
            "--m",       "6"};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage and exit codes") {
    auto r = cli({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("mock-run") != std::string::npos);
    r = cli({"train", "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("--episodes") != std::string::npos);
    CHECK(cli({"--version"}).code == 0);
    r = cli({"frobnicate"});
    CHECK(r.code == 1);
    CHECK_FALSE(r.err.empty());
    CHECK(cli({}).code == 1);
    CHECK(cli({"embed", "--in", "x.jsonl"}).code == 1);  // --out missing
    CHECK(cli({"embed", "--in", "/nonexistent/x.jsonl", "--out", "y.emb"}).code == 1);
}

TEST_CASE("runtime failures exit 2") {
    testing::TempDir dir("cli");
    DatasetSplit s;
    s.samples = {Sample{.id = "a", .text = "hello", .label = 0}};
    save_dataset(s, dir / "d.jsonl");
    const auto r = cli({"embed", "--in", (dir / "d.jsonl").string(), "--out", (dir / "no" / "such" / "x.emb").string()});
    CHECK(r.code == 2);
}

TEST_CASE("curate, embed, train, eval and report chain together") {
    testing::TempDir dir("cli");
    MockEnvironmentConfig env;
    env.concept_count = 4;
    env.query_surfaces = 2;
    env.heldout_per_concept = 1;
    env.background_count = 2;
    MockWorld w = generate_mock_dataset(env);
    std::filesystem::create_directories(dir / "img");
    std::uint64_t n = 0;
    for (Sample& s : w.train.samples) {
        s.image_path = "img/" + s.id + ".pgm";
        write_pgm(testing::block_image(512, 512, 100 + n++), dir / *s.image_path);
    }
    // One near-duplicate image that curation must drop.
    Sample dup = w.train.samples[0];
    dup.id = "t99999";
    w.train.samples.push_back(dup);
    save_dataset(w.train, dir / "train.jsonl");
    save_dataset(w.heldout, dir / "heldout.jsonl");
    const std::string root = dir.path().string();

    auto r = cli({"curate", "--in", root + "/train.jsonl", "--out", root + "/kept.jsonl", "--report",
                  root + "/curation.jsonl", "--image-root", root});
    REQUIRE(r.code == 0);
    const auto kept = load_dataset(dir / "kept.jsonl");
    CHECK(kept.samples.size() == w.train.samples.size() - 1);
    CHECK(std::filesystem::exists(dir / "kept.jsonl.provenance.json"));

    r = cli({"embed", "--in", root + "/kept.jsonl", "--out", root + "/kept.emb", "--image-root", root});
    REQUIRE(r.code == 0);
    const auto store = store_load(dir / "kept.emb");
    CHECK(store.size() == kept.samples.size());
    CHECK(store.dim() == 256 + 64);

    r = cli({"train", "--train", root + "/kept.jsonl", "--store", root + "/kept.emb", "--out", root + "/p.pgds",
             "--episodes", "20", "--batch", "4", "--hidden", "8", "--m", "5", "--backoff-ms", "0"});
    REQUIRE(r.code == 0);
    const auto params = load_checkpoint(dir / "p.pgds");
    CHECK(params.dim == store.dim());
    const auto log = read_records(dir / "p.pgds.log.jsonl");
    REQUIRE(log.size() == 6);
    CHECK(log[0]["kind"] == "run_config");
    CHECK(log[0]["config"]["episodes"] == 20);

    std::vector<Json> preds;
    for (const Sample& s : w.heldout.samples) {
        preds.push_back({{"id", s.id},
                         {"response", render_tagged(*s.label == 1, s.target.value_or(""), s.explanation.value_or(""))}});
    }
    write_records(preds, dir / "pred.jsonl");
    r = cli({"eval", "--gold", root + "/heldout.jsonl", "--pred", root + "/pred.jsonl", "--out", root + "/eval.jsonl"});
    REQUIRE(r.code == 0);
    const auto ev = read_records(dir / "eval.jsonl");
    REQUIRE(ev.size() == 2);
    CHECK(ev[1]["accuracy"] == 1.0);

    r = cli({"report", "--in", root + "/eval.jsonl", "--out", root + "/table.md"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("| eval.jsonl | eval |") != std::string::npos);
    CHECK(slurp(dir / "table.md") == r.out);
    CHECK(cli({"report", "--in", root + "/curation.jsonl"}).code == 1);
}

TEST_CASE("mock-run is reproducible and config files replay it") {
    testing::TempDir dir("cli");
    REQUIRE(cli(small_mock(dir / "a")).code == 0);
    REQUIRE(cli(small_mock(dir / "b")).code == 0);
    for (const char* f : {"report.jsonl", "training_log.jsonl", "policy.pgds", "train.emb", "train.jsonl",
                          "predictions-pgds.jsonl"}) {
        CHECK_MESSAGE(slurp(dir / "a" / f) == slurp(dir / "b" / f), f);
    }
    const auto report = read_records(dir / "a" / "report.jsonl");
    REQUIRE(report.size() == 6);
    CHECK(report[1]["kind"] == "training");
    for (std::size_t i = 2; i < 6; ++i) CHECK(report[i]["kind"] == "strategy");

    // The header of any output works as a config file.
    const auto r = cli({"mock-run", "--config", (dir / "a" / "report.jsonl").string(), "--out-dir", (dir / "c").string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "a" / "report.jsonl") == slurp(dir / "c" / "report.jsonl"));

    // Explicit flags override the file.
    REQUIRE(cli({"mock-run", "--config", (dir / "a" / "report.jsonl").string(), "--episodes", "32", "--out-dir",
                 (dir / "d").string()})
                .code == 0);
    CHECK(read_records(dir / "d" / "report.jsonl")[0]["config"]["episodes"] == 32);

    std::ofstream(dir / "wrong.jsonl") << "{\"command\":\"train\",\"episodes\":3}\n";
    CHECK(cli({"mock-run", "--config", (dir / "wrong.jsonl").string()}).code == 1);
}

}
