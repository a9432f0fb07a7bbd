#include "pgds/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "pgds/backend.hpp"
#include "pgds/common.hpp"
#include "pgds/core_data.hpp"
#include "pgds/curation.hpp"
#include "pgds/embedding.hpp"
#include "pgds/metrics.hpp"
#include "pgds/mock_env.hpp"
#include "pgds/mock_run.hpp"
#include "pgds/policy.hpp"
#include "pgds/simd.hpp"
#include "pgds/trainer.hpp"

namespace pgds {

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop.store(true); }

class SigintScope {
  public:
    SigintScope() {
        g_stop.store(false);
        previous_ = std::signal(SIGINT, on_sigint);
    }
    ~SigintScope() { std::signal(SIGINT, previous_); }

  private:
    void (*previous_)(int) = SIG_DFL;
};

Json header_record(const Json& run_config) {
    return {{"kind", "run_config"}, {"version", std::string(kArtifactVersion)}, {"config", run_config}};
}

// Streams log records to a file as they are produced.
class RecordWriter {
  public:
    explicit RecordWriter(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw RuntimeFailure("cannot write '" + path.string() + "'");
    }
    void write(const Json& record) {
        out_ << dump_record(record) << '\n';
        out_.flush();
    }

  private:
    std::ofstream out_;
};

std::string fmt_metric(const Json& v) {
    if (!v.is_number()) return v.is_string() ? v.get<std::string>() : std::string("-");
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << v.get<double>();
    return s.str();
}

// ---- configuration file -------------------------------------------------

Json load_config_values(const std::filesystem::path& path, const std::string& command) {
    Json merged = Json::object();
    for (const Json& record : read_records(path)) {
        if (!record.is_object()) throw ValidationError("config record in '" + path.string() + "' is not an object");
        Json values = record;
        if (record.contains("kind")) {
            if (record["kind"] != "run_config" || !record.contains("config")) continue;
            values = record["config"];
        }
        if (values.contains("command") && values["command"] != command) {
            throw ValidationError("config in '" + path.string() + "' is for '" + values["command"].get<std::string>() +
                                  "', not '" + command + "'");
        }
        for (auto it = values.begin(); it != values.end(); ++it) {
            if (it.key() != "command") merged[it.key()] = it.value();
        }
    }
    return merged;
}

std::vector<std::string> config_to_flags(const Json& values) {
    std::vector<std::string> flags;
    for (auto it = values.begin(); it != values.end(); ++it) {
        const std::string flag = "--" + it.key();
        const Json& v = it.value();
        if (v.is_boolean()) {
            if (v.get<bool>()) flags.push_back(flag);
        } else if (v.is_string()) {
            flags.push_back(flag);
            flags.push_back(v.get<std::string>());
        } else if (v.is_number()) {
            flags.push_back(flag);
            flags.push_back(v.dump());
        } else if (!v.is_null()) {
            throw ValidationError("config value for '" + it.key() + "' must be a string, number or boolean");
        }
    }
    return flags;
}

// Expands `--config FILE` into flags placed before the explicit ones, so
// explicit flags win (options keep their last value).
std::vector<std::string> expand_config(std::vector<std::string> args) {
    if (args.size() < 2) return args;
    const std::string command = args[1];
    for (std::size_t i = 2; i < args.size(); ++i) {
        std::optional<std::string> path;
        std::size_t consumed = 1;
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            consumed = 2;
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        }
        if (!path) continue;
        const auto flags = config_to_flags(load_config_values(*path, command));
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + consumed));
        args.insert(args.begin() + 2, flags.begin(), flags.end());
        return args;
    }
    return args;
}

// ---- subcommand options -------------------------------------------------

struct CurateOpts {
    std::string in, out, report, image_root;
    double sim_threshold = 0.90;
    std::size_t min_dim = 512;
    double watermark_threshold = 0.15;
};

struct EmbedOpts {
    std::string in, out, provider = "hashing", import_file, image_root, joint = "normalized";
    std::size_t text_dim = 256;
    std::uint64_t seed = 0;
};

struct TrainOpts {
    std::string train, store, backend = "mock", out, log, language = "zh", weights = "0.25,0.25,0.25,0.25", image_root;
    std::size_t k = 1, batch = 8, episodes = 5000, hidden = 256, m = 50, text_dim = 256;
    double lr = 1e-3, gamma = 0.9, noise = 0.0;
    std::uint64_t seed = 7;
    int retries = 2;
    long backoff_ms = 500, timeout_ms = 60000;
    bool strict_parse = false, verbose = false;
};

struct EvalOpts {
    std::string gold, pred, scorer = "hashing", tokenization = "char", out;
    double threshold = 0.7;
    std::size_t text_dim = 256;
    std::uint64_t seed = 0;
    long timeout_ms = 60000;
    bool strict_parse = false;
};

struct MockOpts {
    std::string out_dir = "mock-run", language = "zh", weights = "0.25,0.25,0.25,0.25";
    std::uint64_t seed = 7;
    std::size_t concepts = 64, query_surfaces = 8, heldout = 2, background = 50;
    std::size_t episodes = 5000, hidden = 256, batch = 8, k = 1, m = 50;
    double feature_scale = 0.1, noise = 0.0, lr = 0.5, gamma = 0.9;
};

struct ReportOpts {
    std::vector<std::string> in;
    std::string out;
};

// ---- handlers -----------------------------------------------------------

int do_curate(const CurateOpts& o, std::ostream& out) {
    CurationConfig cfg;
    cfg.dedup_similarity_threshold = o.sim_threshold;
    cfg.min_width = o.min_dim;
    cfg.min_height = o.min_dim;
    cfg.watermark_area_threshold = o.watermark_threshold;
    cfg.validate();
    const Json run_config = {{"command", "curate"},
                             {"in", o.in},
                             {"image-root", o.image_root},
                             {"sim-threshold", o.sim_threshold},
                             {"min-dim", o.min_dim},
                             {"watermark-threshold", o.watermark_threshold}};
    const DatasetSplit split = load_dataset(o.in);
    const std::filesystem::path root =
        o.image_root.empty() ? std::filesystem::path(o.in).parent_path() : std::filesystem::path(o.image_root);
    const CurationOutcome outcome = curate(split, cfg, root);
    save_dataset(outcome.kept, o.out);
    write_provenance(o.out, run_config);
    std::vector<Json> records{header_record(run_config)};
    for (Json& r : outcome.report.to_records()) records.push_back(std::move(r));
    write_records(records, o.report);
    const auto& r = outcome.report;
    out << "kept " << r.kept.size() << ", duplicates " << r.removed_duplicates.size() << ", commercial "
        << r.removed_commercial.size() << ", low resolution " << r.removed_low_res.size() << " (unreadable "
        << r.unreadable.size() << ")\n";
    return 0;
}

int do_embed(const EmbedOpts& o, std::ostream& out) {
    JointMode mode;
    if (o.joint == "normalized") mode = JointMode::Normalized;
    else if (o.joint == "raw") mode = JointMode::Raw;
    else throw ValidationError("--joint must be normalized or raw");
    const Json run_config = {{"command", "embed"},   {"in", o.in},
                             {"provider", o.provider}, {"import-file", o.import_file},
                             {"image-root", o.image_root}, {"joint", o.joint},
                             {"text-dim", o.text_dim}, {"seed", o.seed}};
    const DatasetSplit split = load_dataset(o.in);
    const std::filesystem::path root =
        o.image_root.empty() ? std::filesystem::path(o.in).parent_path() : std::filesystem::path(o.image_root);
    std::unique_ptr<EmbeddingProvider> provider;
    if (o.provider == "hashing") {
        provider = std::make_unique<HashingProvider>(o.text_dim, o.seed, root);
    } else if (o.provider == "import") {
        if (o.import_file.empty()) throw ValidationError("--provider import needs --import-file");
        provider = std::make_unique<ImportedProvider>(ImportedProvider::load(o.import_file));
    } else {
        throw ValidationError("--provider must be hashing or import");
    }
    const EmbeddingStore store = build_store(*provider, split, mode);
    store_save(store, o.out);
    write_provenance(o.out, run_config);
    out << "embedded " << store.size() << " samples, dim " << store.dim() << " (" << simd::active().name << ")\n";
    return 0;
}

int do_train(const TrainOpts& o, std::ostream& out, std::ostream& err) {
    TrainerConfig cfg;
    cfg.k = o.k;
    cfg.m = o.m;
    cfg.batch = o.batch;
    cfg.hidden = o.hidden;
    cfg.episodes = o.episodes;
    cfg.lr = o.lr;
    cfg.gamma = o.gamma;
    cfg.weights = RewardWeights::parse(o.weights);
    cfg.seed = o.seed;
    cfg.language = parse_language(o.language);
    cfg.strict_parse = o.strict_parse;
    cfg.max_retries = o.retries;
    cfg.backoff = std::chrono::milliseconds(o.backoff_ms);
    cfg.validate();
    Json run_config = cfg.to_json();
    run_config["command"] = "train";
    run_config["train"] = o.train;
    run_config["store"] = o.store;
    run_config["backend"] = o.backend;
    run_config["noise"] = o.noise;
    run_config["text-dim"] = o.text_dim;
    run_config["image-root"] = o.image_root;
    run_config["timeout-ms"] = o.timeout_ms;
    run_config["backoff-ms"] = o.backoff_ms;
    run_config["weights"] = o.weights;
    run_config["strict-parse"] = run_config["strict_parse"];
    run_config.erase("strict_parse");

    const DatasetSplit train = load_dataset(o.train);
    const EmbeddingStore store = store_load(o.store);
    const std::filesystem::path root =
        o.image_root.empty() ? std::filesystem::path(o.train).parent_path() : std::filesystem::path(o.image_root);

    std::unique_ptr<ModelBackend> backend;
    if (o.backend == "mock") {
        MockEnvironmentConfig env;
        env.noise_level = o.noise;
        env.seed = o.seed;
        backend = std::make_unique<MockOracle>(env, std::vector<const DatasetSplit*>{&train});
    } else if (o.backend == "remote") {
        RemoteConfig rc = RemoteConfig::from_env();
        rc.timeout = std::chrono::milliseconds(o.timeout_ms);
        rc.image_root = root;
        LogSink sink;
        if (o.verbose) sink = [&err](const std::string& line) { err << line << '\n'; };
        backend = std::make_unique<RemoteBackend>(rc, sink);
    } else {
        throw ValidationError("--backend must be mock or remote");
    }
    const HashingProvider provider(o.text_dim, o.seed);
    const EmbeddingScorer scorer(provider);

    const std::string log_path = o.log.empty() ? o.out + ".log.jsonl" : o.log;
    RecordWriter log(log_path);
    log.write(header_record(run_config));
    SigintScope sigint;
    TrainingHooks hooks;
    hooks.stop = &g_stop;
    hooks.on_log = [&log](const Json& rec) { log.write(rec); };
    const TrainingResult result = run_training(cfg, train, store, *backend, scorer, hooks);
    if (result.interrupted) {
        err << "interrupted after " << result.episodes << " episodes; partial log in " << log_path << '\n';
        return 2;
    }
    save_checkpoint(result.state.params, o.out);
    write_provenance(o.out, run_config);
    out << "trained " << result.episodes << " episodes, " << result.state.step << " updates, " << result.faults
        << " faults; baseline " << result.state.baseline << '\n';
    return 0;
}

int do_eval(const EvalOpts& o, std::ostream& out) {
    EvalOptions opts;
    opts.threshold = o.threshold;
    opts.tokenization = parse_tokenization(o.tokenization);
    opts.strict_parse = o.strict_parse;
    if (!(o.threshold >= 0.0 && o.threshold <= 1.0)) throw ValidationError("--threshold must be in [0,1]");
    const Json run_config = {{"command", "eval"},          {"gold", o.gold},
                             {"pred", o.pred},             {"scorer", o.scorer},
                             {"threshold", o.threshold},   {"tokenization", o.tokenization},
                             {"strict-parse", o.strict_parse}, {"text-dim", o.text_dim},
                             {"seed", o.seed}};
    const DatasetSplit gold = load_dataset(o.gold);
    std::vector<Prediction> preds;
    std::size_t line = 0;
    for (const Json& r : read_records(o.pred)) {
        ++line;
        if (r.is_object() && r.contains("kind")) continue;
        if (!r.is_object() || !r.contains("id") || !r["id"].is_string() || !r.contains("response") ||
            !r["response"].is_string()) {
            throw ValidationError(o.pred + " record " + std::to_string(line) + ": expected {\"id\", \"response\"}");
        }
        preds.push_back({r["id"].get<std::string>(), r["response"].get<std::string>()});
    }

    const HashingProvider provider(o.text_dim, o.seed);
    std::unique_ptr<TextScorer> scorer;
    std::unique_ptr<RemoteBackend> judge;
    if (o.scorer == "hashing") {
        scorer = std::make_unique<EmbeddingScorer>(provider);
    } else if (o.scorer == "remote") {
        RemoteConfig rc = RemoteConfig::from_env();
        rc.timeout = std::chrono::milliseconds(o.timeout_ms);
        judge = std::make_unique<RemoteBackend>(rc);
        scorer = std::make_unique<RemoteJudgeScorer>(*judge);
    } else {
        throw ValidationError("--scorer must be hashing or remote");
    }
    const EvalReport report = build_report(gold, preds, *scorer, opts);
    Json rec = {{"kind", "eval"}};
    rec.update(report.to_json());
    write_records({header_record(run_config), rec}, o.out);
    out << "evaluated " << report.evaluated << " (unparseable " << report.unparseable << "): accuracy "
        << fmt_metric(rec["accuracy"]) << ", f1 " << fmt_metric(rec["f1_positive"]) << ", target "
        << fmt_metric(rec["target_accuracy"]) << ", bleu4 " << fmt_metric(rec["bleu4"]) << '\n';
    return 0;
}

int do_mock_run(const MockOpts& o, std::ostream& out, std::ostream& err) {
    MockRunConfig cfg;
    cfg.env.concept_count = o.concepts;
    cfg.env.query_surfaces = o.query_surfaces;
    cfg.env.heldout_per_concept = o.heldout;
    cfg.env.background_count = o.background;
    cfg.env.concept_feature_scale = o.feature_scale;
    cfg.env.noise_level = o.noise;
    cfg.env.seed = o.seed;
    cfg.trainer.seed = o.seed;
    cfg.trainer.episodes = o.episodes;
    cfg.trainer.hidden = o.hidden;
    cfg.trainer.batch = o.batch;
    cfg.trainer.k = o.k;
    cfg.trainer.m = o.m;
    cfg.trainer.lr = o.lr;
    cfg.trainer.gamma = o.gamma;
    cfg.trainer.weights = RewardWeights::parse(o.weights);
    cfg.trainer.language = parse_language(o.language);
    cfg.env.validate();
    cfg.trainer.validate();
    const Json run_config = {{"command", "mock-run"},
                             {"seed", o.seed},
                             {"concepts", o.concepts},
                             {"query-surfaces", o.query_surfaces},
                             {"heldout", o.heldout},
                             {"background", o.background},
                             {"feature-scale", o.feature_scale},
                             {"noise", o.noise},
                             {"episodes", o.episodes},
                             {"hidden", o.hidden},
                             {"batch", o.batch},
                             {"k", o.k},
                             {"m", o.m},
                             {"lr", o.lr},
                             {"gamma", o.gamma},
                             {"weights", o.weights},
                             {"language", o.language}};

    SigintScope sigint;
    TrainingHooks hooks;
    hooks.stop = &g_stop;
    const MockRunResult result = run_mock_experiment(cfg, hooks);
    if (result.training.interrupted) {
        std::filesystem::create_directories(o.out_dir);
        std::vector<Json> log{header_record(run_config)};
        log.insert(log.end(), result.training.log.begin(), result.training.log.end());
        write_records(log, std::filesystem::path(o.out_dir) / "training_log.jsonl");
        err << "interrupted after " << result.training.episodes << " episodes\n";
        return 2;
    }
    write_mock_artifacts(result, run_config, o.out_dir);

    out << "golden selection rate (last " << cfg.golden_window << " eligible episodes): "
        << (result.golden_rate_final ? fmt_metric(*result.golden_rate_final) : "no data") << '\n';
    out << std::left << std::setw(16) << "strategy" << std::setw(10) << "accuracy" << std::setw(10) << "f1"
        << "golden\n";
    for (std::size_t i = 0; i < result.strategies.size(); ++i) {
        const Json j = result.strategies[i].report.to_json();
        out << std::left << std::setw(16) << to_string(result.strategies[i].strategy) << std::setw(10)
            << fmt_metric(j["accuracy"]) << std::setw(10) << fmt_metric(j["f1_positive"])
            << fmt_metric(Json(result.strategy_golden_rate[i])) << '\n';
    }
    out << "artifacts written to " << o.out_dir << '\n';
    return 0;
}

int do_report(const ReportOpts& o, std::ostream& out) {
    std::ostringstream md;
    const char* keys[] = {"accuracy", "precision", "recall", "f1_positive", "f1_macro", "target_accuracy", "bleu4",
                          "semantic_score_mean"};
    md << "| source | run |";
    for (const char* k : keys) md << ' ' << k << " |";
    md << "\n|---|---|";
    for (std::size_t i = 0; i < std::size(keys); ++i) md << "---|";
    md << '\n';
    std::size_t rows = 0;
    for (const auto& path : o.in) {
        const std::string source = std::filesystem::path(path).filename().string();
        for (const Json& r : read_records(path)) {
            if (!r.is_object()) continue;
            const std::string kind = r.value("kind", "");
            if (kind == "training") {
                out << source << ": training " << r.value("episodes", 0) << " episodes, golden rate "
                    << fmt_metric(r.value("golden_rate_final", Json("no data"))) << ", reward "
                    << fmt_metric(r.value("reward_first_window", Json("no data"))) << " -> "
                    << fmt_metric(r.value("reward_last_window", Json("no data"))) << '\n';
                continue;
            }
            if (kind != "strategy" && kind != "eval") continue;
            md << "| " << source << " | " << (kind == "strategy" ? r.value("strategy", "?") : std::string("eval")) << " |";
            for (const char* k : keys) md << ' ' << fmt_metric(r.value(k, Json("no data"))) << " |";
            md << '\n';
            ++rows;
        }
    }
    if (rows == 0) throw ValidationError("no evaluation records found in the given reports");
    out << md.str();
    if (!o.out.empty()) {
        std::ofstream f(o.out, std::ios::binary | std::ios::trunc);
        if (!f) throw RuntimeFailure("cannot write '" + o.out + "'");
        f << md.str();
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Policy-guided demonstration selection and sarcasm evaluation harness", "pgds"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kArtifactVersion));
    std::string config_placeholder;
    const auto add_config = [&config_placeholder](CLI::App* sub) {
        sub->add_option("--config", config_placeholder, "Line-delimited config file; explicit flags take precedence");
    };

    CurateOpts curate_o;
    auto* curate = app.add_subcommand("curate", "Deduplicate and filter a dataset");
    curate->add_option("--in", curate_o.in, "Input dataset")->required();
    curate->add_option("--out", curate_o.out, "Kept samples")->required();
    curate->add_option("--report", curate_o.report, "Curation report")->required();
    curate->add_option("--image-root", curate_o.image_root, "Directory image paths are relative to");
    curate->add_option("--sim-threshold", curate_o.sim_threshold, "Duplicate when hash similarity exceeds this")
        ->capture_default_str();
    curate->add_option("--min-dim", curate_o.min_dim, "Minimum width and height")->capture_default_str();
    curate->add_option("--watermark-threshold", curate_o.watermark_threshold, "Maximum watermark area fraction")
        ->capture_default_str();
    add_config(curate);

    EmbedOpts embed_o;
    auto* embed = app.add_subcommand("embed", "Build an EMB1 embedding store");
    embed->add_option("--in", embed_o.in, "Input dataset")->required();
    embed->add_option("--out", embed_o.out, "Output store")->required();
    embed->add_option("--provider", embed_o.provider, "hashing or import")->capture_default_str();
    embed->add_option("--import-file", embed_o.import_file, "Precomputed vectors for --provider import");
    embed->add_option("--image-root", embed_o.image_root, "Directory image paths are relative to");
    embed->add_option("--joint", embed_o.joint, "normalized or raw concatenation")->capture_default_str();
    embed->add_option("--text-dim", embed_o.text_dim, "Hashing provider text dimension")->capture_default_str();
    embed->add_option("--seed", embed_o.seed, "Hashing provider seed")->capture_default_str();
    add_config(embed);

    TrainOpts train_o;
    auto* train = app.add_subcommand("train", "Train the selection policy with REINFORCE");
    train->add_option("--train", train_o.train, "Training dataset")->required();
    train->add_option("--store", train_o.store, "Embedding store for the training dataset")->required();
    train->add_option("--out", train_o.out, "Output checkpoint")->required();
    train->add_option("--log", train_o.log, "Training log (default <out>.log.jsonl)");
    train->add_option("--backend", train_o.backend, "mock or remote")->capture_default_str();
    train->add_option("--k", train_o.k, "Demonstrations per prompt")->capture_default_str();
    train->add_option("--m", train_o.m, "Retrieved candidates per query")->capture_default_str();
    train->add_option("--batch", train_o.batch, "Episodes per update")->capture_default_str();
    train->add_option("--lr", train_o.lr, "Learning rate")->capture_default_str();
    train->add_option("--gamma", train_o.gamma, "Baseline decay")->capture_default_str();
    train->add_option("--weights", train_o.weights, "Reward weights format,cls,target,explanation")
        ->capture_default_str();
    train->add_option("--episodes", train_o.episodes, "Training episodes")->capture_default_str();
    train->add_option("--seed", train_o.seed, "Random seed")->capture_default_str();
    train->add_option("--hidden", train_o.hidden, "Policy hidden width")->capture_default_str();
    train->add_option("--language", train_o.language, "Prompt language zh or en")->capture_default_str();
    train->add_flag("--strict-parse", train_o.strict_parse, "Accept only the tagged answer form");
    train->add_option("--noise", train_o.noise, "Mock backend noise level")->capture_default_str();
    train->add_option("--retries", train_o.retries, "Backend retries per episode")->capture_default_str();
    train->add_option("--backoff-ms", train_o.backoff_ms, "First retry delay, doubled per retry")
        ->capture_default_str();
    train->add_option("--timeout-ms", train_o.timeout_ms, "Remote request timeout")->capture_default_str();
    train->add_option("--image-root", train_o.image_root, "Directory image paths are relative to");
    train->add_option("--text-dim", train_o.text_dim, "Scorer text dimension")->capture_default_str();
    train->add_flag("--verbose", train_o.verbose, "Log redacted backend traffic to stderr");
    add_config(train);

    EvalOpts eval_o;
    auto* eval = app.add_subcommand("eval", "Score backend responses against gold annotations");
    eval->add_option("--gold", eval_o.gold, "Gold dataset")->required();
    eval->add_option("--pred", eval_o.pred, "Responses file of {id, response} records")->required();
    eval->add_option("--out", eval_o.out, "Report file")->required();
    eval->add_option("--scorer", eval_o.scorer, "hashing or remote")->capture_default_str();
    eval->add_option("--threshold", eval_o.threshold, "Target match threshold")->capture_default_str();
    eval->add_option("--tokenization", eval_o.tokenization, "BLEU tokenization char or whitespace")
        ->capture_default_str();
    eval->add_flag("--strict-parse", eval_o.strict_parse, "Accept only the tagged answer form");
    eval->add_option("--text-dim", eval_o.text_dim, "Scorer text dimension")->capture_default_str();
    eval->add_option("--seed", eval_o.seed, "Scorer seed")->capture_default_str();
    eval->add_option("--timeout-ms", eval_o.timeout_ms, "Remote judge timeout")->capture_default_str();
    add_config(eval);

    MockOpts mock_o;
    auto* mock = app.add_subcommand("mock-run", "Run the synthetic train-and-compare experiment");
    mock->add_option("--out-dir", mock_o.out_dir, "Artifact directory")->capture_default_str();
    mock->add_option("--seed", mock_o.seed, "Random seed")->capture_default_str();
    mock->add_option("--concepts", mock_o.concepts, "Hidden concepts")->capture_default_str();
    mock->add_option("--query-surfaces", mock_o.query_surfaces, "Query surface clusters")->capture_default_str();
    mock->add_option("--heldout", mock_o.heldout, "Held-out queries per concept")->capture_default_str();
    mock->add_option("--background", mock_o.background, "Background samples")->capture_default_str();
    mock->add_option("--feature-scale", mock_o.feature_scale, "Concept feature scale")->capture_default_str();
    mock->add_option("--noise", mock_o.noise, "Chance an unmatched query is still answered correctly")
        ->capture_default_str();
    mock->add_option("--episodes", mock_o.episodes, "Training episodes")->capture_default_str();
    mock->add_option("--hidden", mock_o.hidden, "Policy hidden width")->capture_default_str();
    mock->add_option("--batch", mock_o.batch, "Episodes per update")->capture_default_str();
    mock->add_option("--k", mock_o.k, "Demonstrations per prompt")->capture_default_str();
    mock->add_option("--m", mock_o.m, "Retrieved candidates per query")->capture_default_str();
    mock->add_option("--lr", mock_o.lr, "Learning rate")->capture_default_str();
    mock->add_option("--gamma", mock_o.gamma, "Baseline decay")->capture_default_str();
    mock->add_option("--weights", mock_o.weights, "Reward weights")->capture_default_str();
    mock->add_option("--language", mock_o.language, "Prompt language zh or en")->capture_default_str();
    add_config(mock);

    ReportOpts report_o;
    auto* report = app.add_subcommand("report", "Tabulate eval and mock-run reports");
    report->add_option("--in", report_o.in, "Report files")->required()->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    report->add_option("--out", report_o.out, "Also write the table here");

    try {
        std::vector<std::string> args = expand_config(raw_args);
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        if (!reversed.empty()) reversed.pop_back();  // program name
        try {
            app.parse(reversed);
        } catch (const CLI::ParseError& e) {
            if (e.get_exit_code() == 0) return app.exit(e, out, err);  // --help, --version
            err << "error: " << e.what() << "\n\n" << app.help();
            return 1;
        }
        if (*curate) return do_curate(curate_o, out);
        if (*embed) return do_embed(embed_o, out);
        if (*train) return do_train(train_o, out, err);
        if (*eval) return do_eval(eval_o, out);
        if (*mock) return do_mock_run(mock_o, out, err);
        if (*report) return do_report(report_o, out);
        err << app.help();
        return 1;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const RuntimeFailure& e) {
        err << "failed: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "failed: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace pgds
