#include "artrec/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "artrec/backend.hpp"
#include "artrec/corpus.hpp"
#include "artrec/distill.hpp"
#include "artrec/error.hpp"
#include "artrec/hashing.hpp"
#include "artrec/http.hpp"
#include "artrec/inference.hpp"
#include "artrec/metrics.hpp"
#include "artrec/policy.hpp"
#include "artrec/prompt.hpp"
#include "artrec/run_config.hpp"
#include "artrec/trainer.hpp"

namespace artrec::cli {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

// --- small helpers ------------------------------------------------------

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& body) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    const fs::path tmp = fs::path(p) += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + p.string());
        out << body;
    }
    fs::rename(tmp, p);
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Paths inside the run directory are recorded relative to it, so manifests
// do not change when the runs root moves.
std::string display_path(const fs::path& p, const std::optional<fs::path>& base) {
    if (base) {
        const auto rel = fs::path(p).lexically_normal().lexically_relative(base->lexically_normal());
        if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
    }
    return p.generic_string();
}

/// Per-invocation state shared by the subcommands.
struct Context {
    std::ostream& out;
    std::ostream& err;
    RunConfig config;
    std::string hash;
    std::string command;

    std::optional<fs::path> dir() const {
        if (!config.seed) return std::nullopt;
        return run_dir(config);
    }

    fs::path need_dir() const { return run_dir(config); }

    /// Sidecar `<file>.manifest.json`: config hash and input/output hashes.
    /// No timestamps, so reruns stay byte-identical.
    void manifest(const fs::path& output, const std::vector<fs::path>& inputs, const ojson& extra = ojson::object()) {
        const auto base = dir();
        ojson m;
        m["tool"] = "artrec";
        m["version"] = kVersion;
        m["command"] = command;
        m["config_hash"] = hash;
        m["output"] = display_path(output, base);
        m["output_sha256"] = sha256_file(output);
        ojson in = ojson::array();
        for (const auto& p : inputs) in.push_back({{"path", display_path(p, base)}, {"sha256", sha256_file(p)}});
        m["inputs"] = in;
        for (const auto& [k, v] : extra.items()) m[k] = v;
        write_text(fs::path(output) += ".manifest.json", m.dump(2) + "\n");
        out << "wrote " << output.generic_string() << '\n';
    }

    /// Wall-clock facts live here, apart from the primary outputs.
    void log_metadata(const fs::path& output) const {
        const auto base = dir();
        const fs::path meta = base ? *base / "metadata.jsonl" : fs::path(output).parent_path() / "metadata.jsonl";
        ojson j;
        j["time_utc"] = static_cast<std::int64_t>(std::time(nullptr));
        j["command"] = command;
        j["config_hash"] = hash;
        j["output"] = display_path(output, base);
        if (meta.has_parent_path()) fs::create_directories(meta.parent_path());
        std::ofstream(meta, std::ios::app) << j.dump() << '\n';
    }
};

// --- corpus loading -----------------------------------------------------

fs::path corpus_dir(const Context& ctx) { return ctx.need_dir() / "corpus"; }
fs::path split_file(const Context& ctx, const std::string& split) { return corpus_dir(ctx) / (split + ".jsonl"); }

corpus::SplitLabel parse_split(const std::string& s) {
    if (s == "train") return corpus::SplitLabel::train;
    if (s == "val") return corpus::SplitLabel::val;
    if (s == "test") return corpus::SplitLabel::test;
    throw ConfigError("split", "expected train, val or test, got '" + s + "'");
}

corpus::ExampleSet load_split(const Context& ctx, const std::string& split) {
    const auto path = split_file(ctx, split);
    if (!fs::exists(path))
        throw ValidationError("missing " + path.generic_string() + "; run `artrec synth` with the same config first");
    return corpus::load_examples(path, parse_split(split));
}

// --- backends -----------------------------------------------------------

struct ResolvedBackend {
    std::unique_ptr<backend::Backend> backend;
    std::string label;  // file-name safe
    std::vector<fs::path> inputs;
};

std::string safe_label(std::string s) {
    for (auto& c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_')) c = '-';
    return s;
}

double parse_number(const std::string& text, const std::string& field) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(field, "expected a number, got '" + text + "'");
    }
}

ResolvedBackend make_backend(const Context& ctx, const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);

    auto lookup = [&] {
        auto l = std::make_shared<backend::ExampleLookup>();
        for (const char* s : {"train", "val", "test"}) l->add(load_split(ctx, s));
        return std::shared_ptr<const backend::ExampleLookup>(std::move(l));
    };

    ResolvedBackend r;
    if (kind == "oracle") {
        const double eps = arg.empty() ? 0.0 : parse_number(arg, "backend");
        r.backend = std::make_unique<backend::MockOracle>(lookup(), eps);
        r.label = arg.empty() ? "oracle" : "oracle-" + arg;
    } else if (kind == "fixed") {
        r.backend = std::make_unique<backend::MockFixed>();
        r.label = "fixed";
    } else if (kind == "noisy") {
        if (arg.empty()) throw ConfigError("backend", "noisy needs a dropout rate, e.g. noisy:0.1");
        r.backend = std::make_unique<backend::MockNoisy>(lookup(), parse_number(arg, "backend"));
        r.label = "noisy-" + arg;
    } else if (kind == "random") {
        r.backend = std::make_unique<backend::MockRandom>();
        r.label = "random";
    } else if (kind == "heuristic") {
        r.backend = std::make_unique<backend::PolicyBackend>(lookup(), policy::heuristic_params(), "heuristic");
        r.label = "heuristic";
    } else if (kind == "policy") {
        if (arg.empty()) throw ConfigError("backend", "policy needs a checkpoint path, e.g. policy:ckpt.json");
        auto params = policy::load_checkpoint(arg);
        r.label = "policy-" + fs::path(arg).stem().string();
        r.backend = std::make_unique<backend::PolicyBackend>(lookup(), std::move(params), r.label);
        r.inputs.push_back(arg);
    } else if (kind == "http") {
        const auto& b = ctx.config.backend;
        backend::HttpConfig h;
        h.url = arg.empty() ? b.url : arg;
        if (h.url.empty()) throw ConfigError("backend.url", "http backend needs a URL (config or http:<url>)");
        h.auth_env = b.auth_env;
        h.model = b.model;
        h.timeout = std::chrono::milliseconds(b.timeout_ms);
        h.retry.max_attempts = b.retries;
        if (b.replay) h.replay_dir = ctx.need_dir() / "replay";
        h.offline = b.offline;
        r.backend = std::make_unique<backend::HttpCompletion>(h);
        r.label = "http";
    } else {
        throw ConfigError("backend", "unknown backend '" + spec +
                                         "' (oracle[:eps], fixed, noisy:d, random, heuristic, policy:<ckpt>, http)");
    }
    r.label = safe_label(r.label);
    return r;
}

// --- subcommands --------------------------------------------------------

int cmd_synth(Context& ctx, const std::optional<std::string>& out_dir) {
    const auto seed = require_seed(ctx.config);
    const auto dir = out_dir ? fs::path(*out_dir) : corpus_dir(ctx);
    auto cfg = ctx.config.corpus;
    cfg.seed = seed;
    const auto c = corpus::generate(cfg);
    const auto sp = corpus::split(c.examples, ctx.config.fractions, seed);
    const double bayes = corpus::bayes_optimal_accuracy(c.examples, cfg.preference_noise);

    fs::create_directories(dir);
    const ojson stats = {{"examples", c.examples.size()},
                         {"duplicates_skipped", c.duplicates_skipped},
                         {"bayes_optimal_accuracy", bayes}};
    for (const auto& [name, set] : {std::pair<std::string, const corpus::ExampleSet*>{"train", &sp.train},
                                    {"val", &sp.val},
                                    {"test", &sp.test}}) {
        const auto path = dir / (name + ".jsonl");
        corpus::save_examples(*set, path);
        ctx.manifest(path, {}, {{"split", name}, {"examples", set->size()}});
    }
    const auto oracle_path = dir / "corpus.oracle";
    corpus::save_oracle(corpus::oracle_of(c.examples, cfg.preference_noise), oracle_path);
    ctx.manifest(oracle_path, {}, stats);
    ctx.log_metadata(dir);

    ctx.out << "examples " << c.examples.size() << " (train " << sp.train.size() << ", val " << sp.val.size()
            << ", test " << sp.test.size() << "), duplicates skipped " << c.duplicates_skipped << '\n';
    ctx.out << "preference_noise " << cfg.preference_noise << ", bayes-optimal accuracy " << fmt("%.4f", bayes)
            << '\n';
    return kExitOk;
}

fs::path reasoning_file(const Context& ctx, const std::string& split) {
    return ctx.need_dir() / "reasoning" / (split + ".jsonl");
}

std::map<std::string, std::string> read_reasonings(const fs::path& path) {
    std::map<std::string, std::string> out;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path.string() + "; run `artrec distill` first");
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            out[j.at("example_key").get<std::string>()] = j.at("reasoning").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(e.what(), n);
        }
    }
    return out;
}

int cmd_export(Context& ctx, const std::string& kind, const std::string& split,
               const std::optional<std::string>& reasoning_path, const std::optional<std::string>& out_path) {
    const auto seed = require_seed(ctx.config);
    const auto set = load_split(ctx, split);
    std::vector<fs::path> inputs = {split_file(ctx, split)};
    prompt::Export ex;
    if (kind == "sft") {
        ex = prompt::export_sft(set);
    } else if (kind == "sft-reason") {
        const fs::path rp = reasoning_path ? fs::path(*reasoning_path) : reasoning_file(ctx, split);
        ex = prompt::export_sft_reasoning(set, read_reasonings(rp));
        inputs.push_back(rp);
    } else if (kind == "dpo") {
        ex = prompt::export_dpo(set, seed);
    } else {
        throw ConfigError("kind", "expected sft, sft-reason or dpo");
    }
    const fs::path path = out_path ? fs::path(*out_path) : ctx.need_dir() / "exports" / (kind + "." + split + ".jsonl");
    std::ostringstream body;
    prompt::write_jsonl(ex.records, body);
    write_text(path, body.str());
    const auto& st = ex.stats;
    ctx.manifest(path, inputs,
                 {{"kind", kind},
                  {"emitted", st.emitted},
                  {"missing_reasoning", st.missing_reasoning},
                  {"rejected_reasoning", st.rejected_reasoning},
                  {"skipped_single_option", st.skipped_single_option}});
    ctx.log_metadata(path);
    ctx.out << "records " << st.emitted << ", skipped " << st.skipped() << " (missing reasoning "
            << st.missing_reasoning << ", rejected reasoning " << st.rejected_reasoning << ", single option "
            << st.skipped_single_option << ")\n";
    return kExitOk;
}

int cmd_distill(Context& ctx, const std::string& backend_spec, const std::string& split,
                const std::optional<std::string>& out_path) {
    const auto seed = require_seed(ctx.config);
    const auto set = load_split(ctx, split);
    auto teacher = make_backend(ctx, backend_spec);
    backend::DistillOptions opt;
    opt.seed = seed;
    opt.parallelism = ctx.config.backend.parallelism;
    opt.temperature = ctx.config.backend.teacher_temperature;
    opt.max_new_tokens = ctx.config.backend.max_new_tokens;
    const auto d = backend::distill_reasoning(set, *teacher.backend, opt);

    const fs::path path = out_path ? fs::path(*out_path) : reasoning_file(ctx, split);
    std::string body;
    for (const auto& ex : set.examples) {  // input order
        auto it = d.reasonings.find(ex.key());
        if (it == d.reasonings.end()) continue;
        ojson j;
        j["example_key"] = it->first;
        j["reasoning"] = it->second;
        body += j.dump() + "\n";
    }
    write_text(path, body);
    const auto& s = d.stats;
    const ojson stats = {{"teacher", teacher.label}, {"requested", s.requested}, {"accepted", s.accepted},
                         {"filtered", s.filtered},   {"errors", s.errors},       {"filter_rate", s.filter_rate}};
    auto inputs = teacher.inputs;
    inputs.insert(inputs.begin(), split_file(ctx, split));
    ctx.manifest(path, inputs, {{"stats", stats}});
    ctx.log_metadata(path);
    ctx.out << "requested " << s.requested << ", accepted " << s.accepted << ", filtered " << s.filtered
            << " (errors " << s.errors << "), filter rate " << fmt("%.4f", s.filter_rate) << '\n';
    if (s.requested > 0 && s.errors == s.requested) {
        ctx.err << "every teacher request failed\n";
        return kExitBackend;
    }
    return kExitOk;
}

int cmd_infer(Context& ctx, const std::string& backend_spec, const std::string& split,
              const std::optional<std::string>& name, const std::optional<std::string>& out_path) {
    const auto seed = require_seed(ctx.config);
    const auto set = load_split(ctx, split);
    auto b = make_backend(ctx, backend_spec);
    backend::InferenceOptions opt;
    opt.seed = seed;
    opt.parallelism = ctx.config.backend.parallelism;
    opt.max_new_tokens = ctx.config.backend.max_new_tokens;
    opt.temperature = ctx.config.backend.temperature;
    backend::InferenceFailures failures;
    const auto log = backend::run_inference(*b.backend, set, opt, &failures);

    const std::string label = name ? safe_label(*name) : b.label;
    const fs::path path = out_path ? fs::path(*out_path) : ctx.need_dir() / "logs" / (label + "." + split + ".jsonl");
    metrics::write_log(log, path);
    auto inputs = b.inputs;
    inputs.insert(inputs.begin(), split_file(ctx, split));
    ctx.manifest(path, inputs, {{"backend", b.backend->name()}, {"split", split}, {"failed", failures.count}});
    ctx.log_metadata(path);
    ctx.out << "rows " << log.size() << ", failed " << failures.count << '\n';
    if (failures.count > 0) {
        ctx.err << "first failure: " << failures.first_error << '\n';
        const bool too_many = static_cast<double>(failures.count) >
                              ctx.config.eval.max_failed_fraction * static_cast<double>(log.size());
        if (too_many && !ctx.config.eval.allow_partial) return kExitBackend;
    }
    return kExitOk;
}

int cmd_train(Context& ctx, const std::string& objective, const std::optional<std::string>& init_arg,
              const std::optional<std::string>& lr_grid_arg, const std::optional<std::string>& out_path) {
    const auto seed = require_seed(ctx.config);
    policy::TrainConfig tc;
    tc.objective = policy::parse_objective(objective);
    tc.beta = ctx.config.train.beta;
    tc.max_epochs = ctx.config.train.max_epochs;
    tc.patience = ctx.config.train.patience;
    tc.seed = seed;
    if (!ctx.config.train.lr_grid.empty()) tc.lr_grid = ctx.config.train.lr_grid;
    if (lr_grid_arg) {
        if (*lr_grid_arg == "llm") {
            tc.lr_grid = policy::llm_lr_grid();
        } else {
            tc.lr_grid.clear();
            std::stringstream ss(*lr_grid_arg);
            std::string tok;
            while (std::getline(ss, tok, ',')) tc.lr_grid.push_back(parse_number(tok, "lr-grid"));
        }
    }

    const auto ckpt_dir = ctx.need_dir() / "checkpoints";
    std::string init_spec = init_arg.value_or(tc.objective == policy::Objective::dpo ? "sft" : "zeros");
    policy::PolicyParams init;
    std::vector<fs::path> inputs = {split_file(ctx, "train"), split_file(ctx, "val")};
    if (init_spec == "zeros") {
        init = policy::PolicyParams::zeros();
    } else if (init_spec == "heuristic") {
        init = policy::heuristic_params();
    } else {
        fs::path p = init_spec;
        if (!fs::exists(p) && fs::exists(ckpt_dir / (init_spec + ".json"))) p = ckpt_dir / (init_spec + ".json");
        if (!fs::exists(p)) throw ValidationError("init checkpoint '" + init_spec + "' not found");
        init = policy::load_checkpoint(p);
        inputs.push_back(p);
        init_spec = display_path(p, ctx.dir());
    }
    tc.init_checkpoint = init_spec;

    const auto train_set = load_split(ctx, "train");
    const auto val_set = load_split(ctx, "val");
    policy::TrainData data;
    if (tc.objective == policy::Objective::sft) data.sft = policy::option_items(train_set);
    else data.pairs = policy::pair_items(train_set, seed);
    const auto val = policy::option_items(val_set);

    const auto result = policy::train(tc, data, val, init);
    const auto table = policy::render_lr_table(result);
    ctx.out << table;

    const fs::path path = out_path ? fs::path(*out_path) : ckpt_dir / (objective + ".json");
    ojson runs = ojson::array();
    for (const auto& r : result.runs)
        runs.push_back({{"lr", r.lr},
                        {"failed", r.failed},
                        {"epochs_run", r.epochs_run},
                        {"best_epoch", r.best_epoch},
                        {"best_val_accuracy", r.best_val_accuracy},
                        {"best_val_ips", r.best_val_ips}});
    ojson extra;
    extra["config_hash"] = ctx.hash;
    extra["beta"] = tc.beta;
    extra["lr_grid"] = tc.lr_grid;
    extra["runs"] = runs;
    policy::save_checkpoint(result.params, path, extra.dump());
    write_text(fs::path(path).replace_extension(".lr.txt"), table);
    ctx.manifest(path, inputs, {{"objective", objective}});
    ctx.log_metadata(path);
    const auto& best = result.runs[result.best_run];
    ctx.out << "selected lr " << fmt("%.1e", best.lr) << " (val ips " << fmt("%.4f", best.best_val_ips)
            << ", val accuracy " << fmt("%.4f", best.best_val_accuracy) << ")\n";
    return kExitOk;
}

fs::path default_report_dir(const Context& ctx, const fs::path& log_path) {
    if (auto d = ctx.dir()) return *d / "reports";
    return log_path.parent_path().parent_path() / "reports";
}

int cmd_eval(Context& ctx, const std::string& log_path, const std::optional<std::string>& baseline_path,
             const std::optional<std::string>& name_arg, const std::optional<std::string>& out_dir) {
    const auto log = metrics::read_log(log_path);
    if (!ctx.config.eval.allow_partial) backend::require_mostly_complete(log, ctx.config.eval.max_failed_fraction);
    const std::string name = name_arg.value_or(fs::path(log_path).stem().stem().string());
    auto report = metrics::evaluate(log, {}, name);
    std::vector<fs::path> inputs = {log_path};

    if (baseline_path) {
        const auto base_log = metrics::read_log(*baseline_path);
        try {
            metrics::require_same_keys(log, base_log);
        } catch (const metrics::KeyMismatchError& e) {
            ctx.err << "key mismatch against baseline " << *baseline_path << ": " << e.what() << '\n';
            return kExitValidation;
        }
        if (!ctx.config.eval.allow_partial)
            backend::require_mostly_complete(base_log, ctx.config.eval.max_failed_fraction);
        const auto base = metrics::evaluate(base_log, {}, fs::path(*baseline_path).stem().stem().string());
        metrics::attach_baseline(report, base);
        inputs.push_back(*baseline_path);
    }

    const fs::path dir = out_dir ? fs::path(*out_dir) : default_report_dir(ctx, log_path);
    auto j = ojson::parse(metrics::to_json(report));
    j["config_hash"] = ctx.hash;
    ojson in = ojson::array();
    for (const auto& p : inputs) in.push_back({{"path", display_path(p, ctx.dir())}, {"sha256", sha256_file(p)}});
    j["inputs"] = in;

    const auto table = metrics::render_table(report);
    write_text(dir / (name + ".json"), j.dump(2) + "\n");
    write_text(dir / (name + ".txt"), table);
    write_text(dir / (name + ".labels.csv"), metrics::label_breakdown_csv(report));
    ctx.out << table;
    for (const char* ext : {".json", ".txt", ".labels.csv"}) ctx.manifest(dir / (name + ext), inputs);
    ctx.log_metadata(dir / (name + ".json"));
    return kExitOk;
}

int cmd_report(Context& ctx, const std::vector<std::string>& entries, const std::string& baseline,
               const std::optional<std::string>& out_path) {
    std::vector<metrics::ReportEntry> parsed;
    std::vector<fs::path> inputs;
    for (const auto& e : entries) {
        const auto eq = e.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("report", "entries are name=report.json, got '" + e + "'");
        const fs::path p = e.substr(eq + 1);
        parsed.push_back({e.substr(0, eq), metrics::report_from_json(read_text(p))});
        inputs.push_back(p);
    }
    try {
        const auto table = metrics::render_comparison(parsed, baseline);
        ctx.out << table;
        if (out_path) {
            write_text(*out_path, table);
            ctx.manifest(*out_path, inputs, {{"baseline", baseline}});
            ctx.log_metadata(*out_path);
        }
    } catch (const metrics::KeyMismatchError& e) {
        ctx.err << "reports are not comparable: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Personalized artwork selection: corpus, exports, training, inference and evaluation", "artrec"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::optional<std::string> config_path, out_path, backend_spec, split_arg;
    std::optional<std::uint64_t> seed;
    std::optional<int> parallelism;
    bool allow_partial = false;
    auto common = [&](CLI::App* sub, bool with_backend, bool with_split) {
        sub->add_option("--config", config_path, "JSON run configuration");
        sub->add_option("--seed", seed, "seed for every stochastic step");
        sub->add_option("--out", out_path, "override the output path");
        sub->add_option("--parallelism", parallelism, "concurrent backend requests")->check(CLI::PositiveNumber);
        sub->add_flag("--allow-partial", allow_partial, "accept logs with more than 1% failed rows");
        if (with_backend)
            sub->add_option("--backend", backend_spec,
                            "oracle[:eps] | fixed | noisy:d | random | heuristic | policy:<ckpt> | http[:url]");
        if (with_split) sub->add_option("--split", split_arg, "train | val | test");
    };

    auto* synth = app.add_subcommand("synth", "generate the synthetic corpus and its splits");
    common(synth, false, false);

    std::string kind = "sft";
    std::optional<std::string> reasoning_path;
    auto* exp = app.add_subcommand("export", "write SFT, reasoning-SFT or DPO training JSONL");
    common(exp, false, true);
    exp->add_option("--kind", kind, "sft | sft-reason | dpo")->check(CLI::IsMember({"sft", "sft-reason", "dpo"}));
    exp->add_option("--reasoning", reasoning_path, "reasoning JSONL from distill");

    auto* distill = app.add_subcommand("distill", "collect teacher justifications and filter them");
    common(distill, true, true);

    std::optional<std::string> name;
    auto* infer = app.add_subcommand("infer", "generate predictions and write a prediction log");
    common(infer, true, true);
    infer->add_option("--name", name, "log name (defaults to the backend label)");

    std::string objective = "sft";
    std::optional<std::string> init, lr_grid;
    auto* train = app.add_subcommand("train", "train the option policy over a learning-rate grid");
    common(train, false, false);
    train->add_option("--objective", objective, "sft | dpo")->check(CLI::IsMember({"sft", "dpo"}));
    train->add_option("--init", init, "zeros | heuristic | checkpoint path or name (dpo default: sft)");
    train->add_option("--lr-grid", lr_grid, "comma-separated learning rates, or 'llm' for the small LLM-style grid");

    std::string log_path;
    std::optional<std::string> baseline_log;
    auto* eval = app.add_subcommand("eval", "accuracy, IPS and breakdowns for a prediction log");
    common(eval, false, false);
    eval->add_option("--log", log_path, "prediction log JSONL")->required();
    eval->add_option("--baseline", baseline_log, "baseline prediction log over the same examples");
    eval->add_option("--name", name, "report name");

    std::vector<std::string> entries;
    std::string baseline_name;
    auto* report = app.add_subcommand("report", "relative comparison table over eval reports");
    common(report, false, false);
    report->add_option("entries", entries, "name=report.json")->required();
    report->add_option("--baseline", baseline_name, "name of the baseline entry")->required();

    std::vector<std::string> argv_store = {"artrec"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        Context ctx{out, err, load_config(config_path), {}, {}};
        if (seed) ctx.config.seed = *seed;
        if (parallelism) ctx.config.backend.parallelism = *parallelism;
        if (allow_partial) ctx.config.eval.allow_partial = true;
        ctx.hash = config_hash(ctx.config);
        ctx.command = app.get_subcommands().front()->get_name();
        out << "config " << ctx.hash << '\n';
        if (ctx.config.seed) out << "run dir " << run_dir(ctx.config).generic_string() << '\n';

        const std::string split = split_arg.value_or(ctx.command == "infer" ? "test" : "train");
        if (synth->parsed()) return cmd_synth(ctx, out_path);
        if (exp->parsed()) return cmd_export(ctx, kind, split, reasoning_path, out_path);
        if (distill->parsed()) {
            if (!backend_spec) throw ConfigError("backend", "distill needs a teacher --backend");
            return cmd_distill(ctx, *backend_spec, split, out_path);
        }
        if (infer->parsed()) {
            if (!backend_spec) throw ConfigError("backend", "infer needs --backend");
            return cmd_infer(ctx, *backend_spec, split, name, out_path);
        }
        if (train->parsed()) return cmd_train(ctx, objective, init, lr_grid, out_path);
        if (eval->parsed()) return cmd_eval(ctx, log_path, baseline_log, name, out_path);
        if (report->parsed()) return cmd_report(ctx, entries, baseline_name, out_path);
    } catch (const BackendError& e) {
        err << "backend error: " << e.what();
        if (e.status()) err << " (status " << e.status() << ")";
        if (!e.body_excerpt().empty()) err << "\n  body: " << e.body_excerpt();
        err << '\n';
        return kExitBackend;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitValidation;
}

}  // namespace artrec::cli
