#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <sstream>

#include "artrec/backend.hpp"
#include "artrec/cli.hpp"
#include "artrec/corpus.hpp"
#include "artrec/distill.hpp"
#include "artrec/error.hpp"
#include "artrec/extract.hpp"
#include "artrec/features.hpp"
#include "artrec/inference.hpp"
#include "artrec/metrics.hpp"
#include "artrec/policy.hpp"
#include "artrec/prompt.hpp"
#include "artrec/trainer.hpp"

namespace py = pybind11;
using namespace artrec;

namespace {

corpus::CorpusConfig make_config(const std::string& preset, std::optional<int> n_users, std::optional<int> n_titles,
                                 std::optional<int> n_examples, std::optional<double> noise, std::uint64_t seed) {
    auto c = corpus::preset(preset).config;
    if (n_users) c.n_users = *n_users;
    if (n_titles) c.n_titles = *n_titles;
    if (n_examples) c.n_examples = *n_examples;
    if (noise) c.preference_noise = *noise;
    c.seed = seed;
    return c;
}

std::unique_ptr<backend::Backend> mock_backend(const std::string& spec, const corpus::ExampleSet& set) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    auto lookup = std::make_shared<backend::ExampleLookup>(set);
    if (kind == "oracle") return std::make_unique<backend::MockOracle>(lookup, arg.empty() ? 0.0 : std::stod(arg));
    if (kind == "noisy") return std::make_unique<backend::MockNoisy>(lookup, std::stod(arg));
    if (kind == "fixed") return std::make_unique<backend::MockFixed>();
    if (kind == "random") return std::make_unique<backend::MockRandom>();
    if (kind == "heuristic")
        return std::make_unique<backend::PolicyBackend>(lookup, policy::heuristic_params(), "heuristic");
    throw ConfigError("backend", "unknown mock backend '" + spec + "' (oracle[:eps], noisy:d, fixed, random, heuristic)");
}

py::dict report_dict(const metrics::EvalReport& r) {
    return py::module_::import("json").attr("loads")(metrics::to_json(r));
}

std::vector<policy::OptionItem> to_items(const std::vector<std::pair<Eigen::MatrixXd, int>>& batch) {
    std::vector<policy::OptionItem> out;
    for (const auto& [phi, truth] : batch) out.push_back({phi, truth});
    return out;
}

std::vector<policy::PairItem> to_pairs(const std::vector<std::tuple<Eigen::MatrixXd, int, int>>& batch) {
    std::vector<policy::PairItem> out;
    for (const auto& [phi, c, r] : batch) out.push_back({phi, c, r});
    return out;
}

}  // namespace

PYBIND11_MODULE(_artrec, m) {
    m.doc() = "Personalized artwork selection toolkit: corpus, prompts, extraction, metrics, training.";

    auto base = py::register_exception<Error>(m, "ArtrecError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<BackendError>(m, "BackendError", base.ptr());
    py::register_exception<TrainingError>(m, "TrainingError", base.ptr());

    // --- corpus -----------------------------------------------------------

    py::class_<corpus::Example>(m, "Example")
        .def_property_readonly("key", &corpus::Example::key)
        .def_property_readonly("user_id", [](const corpus::Example& e) { return e.user->user_id; })
        .def_property_readonly("title_id", [](const corpus::Example& e) { return e.title->title_id; })
        .def_property_readonly("m", &corpus::Example::m)
        .def_readonly("truth_index", &corpus::Example::truth_index)
        .def_property_readonly("captions",
                               [](const corpus::Example& e) {
                                   std::vector<std::string> out;
                                   for (const auto& a : e.title->options) out.push_back(a.caption);
                                   return out;
                               })
        .def("to_json", &corpus::example_to_json_line)
        .def("__repr__", [](const corpus::Example& e) {
            return "<Example " + e.key() + " m=" + std::to_string(e.m()) + " truth=" + std::to_string(e.truth_index) +
                   ">";
        });

    py::class_<corpus::ExampleSet>(m, "ExampleSet")
        .def("__len__", &corpus::ExampleSet::size)
        .def("__getitem__",
             [](const corpus::ExampleSet& s, std::ptrdiff_t i) {
                 const auto n = static_cast<std::ptrdiff_t>(s.size());
                 if (i < 0) i += n;
                 if (i < 0 || i >= n) throw py::index_error();
                 return s.examples[static_cast<std::size_t>(i)];
             })
        .def("__iter__",
             [](const corpus::ExampleSet& s) { return py::make_iterator(s.examples.begin(), s.examples.end()); },
             py::keep_alive<0, 1>())
        .def_property_readonly("split", [](const corpus::ExampleSet& s) { return std::string(to_string(s.split_label)); })
        .def("save", &corpus::save_examples, py::arg("path"));

    m.def(
        "generate_corpus",
        [](std::uint64_t seed, const std::string& preset, std::optional<int> n_users, std::optional<int> n_titles,
           std::optional<int> n_examples, std::optional<double> preference_noise) {
            return corpus::generate(make_config(preset, n_users, n_titles, n_examples, preference_noise, seed)).examples;
        },
        py::arg("seed"), py::arg("preset") = "desk-scale", py::arg("n_users") = py::none(),
        py::arg("n_titles") = py::none(), py::arg("n_examples") = py::none(),
        py::arg("preference_noise") = py::none(), "Synthetic examples; sizes default to the preset.");
    m.def("load_examples", [](const std::filesystem::path& p) { return corpus::load_examples(p); }, py::arg("path"));
    m.def(
        "split",
        [](const corpus::ExampleSet& set, std::array<double, 3> fractions, std::uint64_t seed) {
            auto s = corpus::split(set, fractions, seed);
            return py::make_tuple(s.train, s.val, s.test);
        },
        py::arg("examples"), py::arg("fractions"), py::arg("seed"));
    m.def("bayes_optimal_accuracy", &corpus::bayes_optimal_accuracy, py::arg("examples"), py::arg("preference_noise"));
    m.def("oracle_choice", &corpus::oracle_choice, py::arg("example"));

    // --- prompts and exports ----------------------------------------------

    m.def("render_prompt", [](const corpus::Example& e) { return prompt::render_prompt(e).prompt_text; },
          py::arg("example"));
    m.def(
        "parse_prompt",
        [](const std::string& text) {
            std::vector<std::pair<int, std::string>> out;
            for (auto& o : prompt::parse_prompt(text)) out.emplace_back(o.option_id, std::move(o.caption));
            return out;
        },
        py::arg("text"), "List of (option_id, caption).");
    m.def(
        "export_jsonl",
        [](const corpus::ExampleSet& set, const std::string& kind, std::uint64_t seed) {
            prompt::Export e;
            if (kind == "sft") e = prompt::export_sft(set);
            else if (kind == "dpo") e = prompt::export_dpo(set, seed);
            else throw ConfigError("kind", "expected sft or dpo");
            std::ostringstream out;
            prompt::write_jsonl(e.records, out);
            return out.str();
        },
        py::arg("examples"), py::arg("kind") = "sft", py::arg("seed") = 0);

    // --- extraction -------------------------------------------------------

    py::class_<extract::ExtractionResult>(m, "ExtractionResult")
        .def_readonly("option_id", &extract::ExtractionResult::option_id)
        .def_readonly("score", &extract::ExtractionResult::score)
        .def_readonly("tie", &extract::ExtractionResult::tie)
        .def("__repr__", [](const extract::ExtractionResult& r) {
            std::ostringstream out;
            out << "<ExtractionResult option_id=" << r.option_id << " score=" << r.score
                << " tie=" << (r.tie ? "True" : "False") << ">";
            return out.str();
        });
    m.def("normalize", &extract::normalize, py::arg("text"));
    m.def("ngram_score", &extract::ngram_score, py::arg("candidate_tokens"), py::arg("generation_tokens"),
          py::arg("n") = extract::kDefaultNgram);
    m.def("extract_prediction", &extract::extract_prediction, py::arg("generation"), py::arg("candidates"),
          py::arg("n") = extract::kDefaultNgram);

    // --- metrics ----------------------------------------------------------

    py::class_<metrics::PredictionRow>(m, "PredictionRow")
        .def(py::init([](std::string key, int predicted_id, int truth_index, int m, bool failed) {
                 return metrics::PredictionRow{std::move(key), predicted_id, truth_index, m, 0.0, false, failed};
             }),
             py::arg("example_key"), py::arg("predicted_id"), py::arg("truth_index"), py::arg("m"),
             py::arg("failed") = false)
        .def_readonly("example_key", &metrics::PredictionRow::example_key)
        .def_readonly("predicted_id", &metrics::PredictionRow::predicted_id)
        .def_readonly("truth_index", &metrics::PredictionRow::truth_index)
        .def_readonly("m", &metrics::PredictionRow::m)
        .def_readonly("tie", &metrics::PredictionRow::tie)
        .def_readonly("failed", &metrics::PredictionRow::failed)
        .def_property_readonly("correct", &metrics::PredictionRow::correct);
    m.def("accuracy", &metrics::accuracy, py::arg("rows"));
    m.def("ips", [](const metrics::PredictionLog& rows) { return metrics::ips(rows); }, py::arg("rows"));
    m.def(
        "evaluate",
        [](const metrics::PredictionLog& rows, const std::string& name) {
            return report_dict(metrics::evaluate(rows, {}, name));
        },
        py::arg("rows"), py::arg("name") = "", "Accuracy, IPS, per-label and per-m breakdowns as a dict.");
    m.def(
        "random_baseline",
        [](const corpus::ExampleSet& set) {
            const auto b = metrics::expected_random_baseline(set);
            return py::make_tuple(b.accuracy, b.ips);
        },
        py::arg("examples"), "Expected (accuracy, ips) of a uniform random policy.");

    // --- backends, inference, distillation --------------------------------

    m.def(
        "run_inference",
        [](const corpus::ExampleSet& set, const std::string& backend_spec, std::uint64_t seed, int parallelism) {
            const auto b = mock_backend(backend_spec, set);
            backend::InferenceOptions opts;
            opts.seed = seed;
            opts.parallelism = parallelism;
            py::gil_scoped_release release;
            return backend::run_inference(*b, set, opts);
        },
        py::arg("examples"), py::arg("backend"), py::arg("seed") = 0, py::arg("parallelism") = 1,
        "Prediction rows from a simulated backend: oracle[:eps], noisy:d, fixed, random or heuristic.");
    m.def(
        "distill_reasoning",
        [](const corpus::ExampleSet& set, double error_rate, std::uint64_t seed) {
            auto lookup = std::make_shared<backend::ExampleLookup>(set);
            const backend::MockOracle teacher(lookup, error_rate);
            backend::DistillOptions opts;
            opts.seed = seed;
            backend::Distillation d;
            {
                py::gil_scoped_release release;
                d = backend::distill_reasoning(set, teacher, opts);
            }
            py::dict stats;
            stats["requested"] = d.stats.requested;
            stats["accepted"] = d.stats.accepted;
            stats["filtered"] = d.stats.filtered;
            stats["errors"] = d.stats.errors;
            stats["filter_rate"] = d.stats.filter_rate;
            return py::make_tuple(d.reasonings, stats);
        },
        py::arg("examples"), py::arg("error_rate") = 0.0, py::arg("seed") = 0,
        "Distill against a simulated teacher; returns (reasonings by key, stats).");

    // --- policy -----------------------------------------------------------

    m.def("feature_dim", [] { return policy::FeatureLayout::dim(); });
    m.def("option_features", &policy::option_features, py::arg("example"));
    m.def("heuristic_weights", [] { return policy::heuristic_params().weights; });
    m.def(
        "sft_loss",
        [](const Eigen::VectorXd& w, const std::vector<std::pair<Eigen::MatrixXd, int>>& batch) {
            const auto items = to_items(batch);
            const auto r = policy::sft_loss(w, items);
            return py::make_tuple(r.loss, r.grad);
        },
        py::arg("weights"), py::arg("batch"), "batch: list of (features m x F, truth id). Returns (loss, grad).");
    m.def(
        "dpo_loss",
        [](const Eigen::VectorXd& w, const Eigen::VectorXd& ref, double beta,
           const std::vector<std::tuple<Eigen::MatrixXd, int, int>>& batch) {
            policy::DpoConfig cfg;
            cfg.beta = beta;
            cfg.ref.weights = ref;
            const auto pairs = to_pairs(batch);
            const auto r = policy::dpo_loss(w, cfg, pairs);
            return py::make_tuple(r.loss, r.grad);
        },
        py::arg("weights"), py::arg("ref_weights"), py::arg("beta"), py::arg("batch"),
        "batch: list of (features, chosen id, rejected id). Returns (loss, grad).");
    m.def(
        "train",
        [](const std::string& objective, const corpus::ExampleSet& train_set, const corpus::ExampleSet& val_set,
           std::optional<std::vector<double>> lr_grid, std::uint64_t seed, std::optional<Eigen::VectorXd> init,
           int max_epochs, double beta) {
            policy::TrainConfig cfg;
            cfg.objective = policy::parse_objective(objective);
            if (lr_grid) cfg.lr_grid = *lr_grid;
            cfg.seed = seed;
            cfg.max_epochs = max_epochs;
            cfg.beta = beta;
            auto params = policy::PolicyParams::zeros();
            if (init) params.weights = *init;
            policy::TrainResult r;
            {
                py::gil_scoped_release release;
                policy::TrainData data;
                if (cfg.objective == policy::Objective::sft) data.sft = policy::option_items(train_set);
                else data.pairs = policy::pair_items(train_set, seed);
                r = policy::train(cfg, data, policy::option_items(val_set), params);
            }
            const auto& best = r.runs[r.best_run];
            py::dict out;
            out["weights"] = r.params.weights;
            out["lr"] = best.lr;
            out["val_ips"] = best.best_val_ips;
            out["val_accuracy"] = best.best_val_accuracy;
            out["table"] = policy::render_lr_table(r);
            return out;
        },
        py::arg("objective"), py::arg("train"), py::arg("val"), py::arg("lr_grid") = py::none(), py::arg("seed") = 0,
        py::arg("init") = py::none(), py::arg("max_epochs") = 200, py::arg("beta") = 0.1);
    m.def(
        "score_policy",
        [](const Eigen::VectorXd& w, const corpus::ExampleSet& set) {
            const auto s = policy::score_policy(w, policy::option_items(set));
            return py::make_tuple(s.accuracy, s.ips);
        },
        py::arg("weights"), py::arg("examples"), "(accuracy, ips) of the argmax policy.");

    // --- command line -----------------------------------------------------

    m.def(
        "cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run an artrec subcommand in-process; returns (exit code, stdout, stderr).");
}
