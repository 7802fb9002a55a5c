// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "artrec/backend.hpp"
#include "artrec/corpus.hpp"
#include "artrec/distill.hpp"
#include "artrec/extract.hpp"
#include "artrec/features.hpp"
#include "artrec/inference.hpp"
#include "artrec/metrics.hpp"
#include "artrec/policy.hpp"
#include "artrec/prompt.hpp"
#include "artrec/trainer.hpp"

using namespace artrec;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

int failures = 0;

void run(const char* id, const char* title, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > budget_s) o.require(false, "took " + fmt("%.1f", secs) + "s, budget " + fmt("%.0f", budget_s) + "s");
    std::printf("%s %s %s (%.2fs)%s%s\n", o.pass ? "PASS" : "FAIL", id, title, secs, o.detail.empty() ? "" : ": ",
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

corpus::Corpus desk_corpus(std::uint64_t seed) {
    auto p = corpus::preset("desk-scale");
    p.config.seed = seed;
    return corpus::generate(p.config);
}

Outcome metric_identities() {
    Outcome o;
    const auto c = desk_corpus(11);
    const auto& set = c.examples;
    o.require(set.size() >= 5000, "eval set too small");

    double inv_m = 0.0, sum_m = 0.0;
    for (const auto& ex : set.examples) {
        inv_m += 1.0 / ex.m();
        sum_m += ex.m();
    }
    inv_m /= static_cast<double>(set.size());
    const double mean_m = sum_m / static_cast<double>(set.size());

    // Per-row IPS variance under a uniform policy is E[m] - 1 (about 10 here),
    // so one pass over 12k rows leaves a standard error near 0.03. Pool 20
    // independent policy draws over the same rows to make the band meaningful.
    constexpr int kDraws = 20;
    metrics::PredictionLog random_log, perfect_log;
    random_log.reserve(set.size() * kDraws);
    std::mt19937_64 rng(11);
    for (int d = 0; d < kDraws; ++d) {
        for (const auto& ex : set.examples) {
            const int pick = std::uniform_int_distribution<int>(1, ex.m())(rng);
            random_log.push_back({ex.key(), pick, ex.truth_index, ex.m(), 0.0, false, false});
        }
    }
    for (const auto& ex : set.examples) perfect_log.push_back({ex.key(), ex.truth_index, ex.truth_index, ex.m(), 1.0, false, false});

    const double r_ips = metrics::ips(random_log), r_acc = metrics::accuracy(random_log);
    const double p_ips = metrics::ips(perfect_log);
    o.require(std::abs(r_ips - 1.0) <= 0.05, "random ips " + fmt("%.4f", r_ips));
    o.require(std::abs(r_acc - inv_m) <= 0.02, "random acc " + fmt("%.4f", r_acc) + " vs " + fmt("%.4f", inv_m));
    o.require(p_ips == mean_m, "perfect ips " + fmt("%.6f", p_ips) + " vs mean m " + fmt("%.6f", mean_m));
    if (o.pass)
        o.detail = "N=" + std::to_string(set.size()) + " x " + std::to_string(kDraws) + " draws: random ips " +
                   fmt("%.4f", r_ips) + " acc " + fmt("%.4f", r_acc) + " (E " + fmt("%.4f", inv_m) +
                   "), perfect ips = mean m = " + fmt("%.4f", mean_m);
    return o;
}

Outcome ips_weighting() {
    Outcome o;
    const metrics::PredictionLog at40 = {{"a/x", 7, 7, 40, 1.0, false, false}};
    const metrics::PredictionLog at2 = {{"b/y", 2, 2, 2, 1.0, false, false}};
    // Same denominator (one row each), so contributions compare directly.
    const double w40 = metrics::ips(at40), w2 = metrics::ips(at2);
    o.require(w40 == 20.0 * w2, "ratio " + fmt("%.17g", w40 / w2));
    metrics::PredictionLog both = at40;
    both.push_back(at2.front());
    o.require(metrics::ips(both) == 21.0, "combined " + fmt("%.17g", metrics::ips(both)));
    return o;
}

Outcome loss_correctness() {
    Outcome o;
    auto cfg = corpus::preset("desk-scale").config;
    cfg.n_users = 200;
    cfg.n_titles = 100;
    cfg.n_examples = 600;
    cfg.seed = 3;
    const auto c = corpus::generate(cfg);
    const auto items = policy::option_items(c.examples);
    const auto pairs = policy::pair_items(c.examples, 3);
    const auto F = static_cast<Eigen::Index>(policy::FeatureLayout::dim());

    std::mt19937_64 rng(2024);
    std::normal_distribution<double> gauss(0.0, 0.3);
    auto random_weights = [&] {
        Eigen::VectorXd w(F);
        for (Eigen::Index i = 0; i < F; ++i) w[i] = gauss(rng);
        return w;
    };
    auto sample = [&](const auto& pool, std::size_t k) {
        std::vector<typename std::decay_t<decltype(pool)>::value_type> out;
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        for (std::size_t i = 0; i < k; ++i) out.push_back(pool[pick(rng)]);
        return out;
    };
    std::uniform_int_distribution<std::size_t> batch_size(1, 8);

    double worst_sft = 0.0, worst_dpo = 0.0, worst_anchor = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto batch = sample(items, batch_size(rng));
        const auto w = random_weights();
        worst_sft = std::max(worst_sft, policy::grad_check(
                                            [&](const Eigen::VectorXd& v) { return policy::sft_loss(v, batch); }, w));
    }
    for (int t = 0; t < 100; ++t) {
        const auto batch = sample(pairs, batch_size(rng));
        policy::DpoConfig dc;
        dc.beta = std::uniform_real_distribution<double>(0.01, 2.0)(rng);
        dc.ref.weights = random_weights();
        const auto w = random_weights();
        worst_dpo = std::max(
            worst_dpo, policy::grad_check([&](const Eigen::VectorXd& v) { return policy::dpo_loss(v, dc, batch); }, w));
    }
    for (int t = 0; t < 20; ++t) {
        const auto batch = sample(pairs, batch_size(rng));
        policy::DpoConfig dc;
        dc.beta = std::uniform_real_distribution<double>(0.01, 5.0)(rng);
        dc.ref.weights = random_weights();
        worst_anchor = std::max(worst_anchor, std::abs(policy::dpo_loss(dc.ref.weights, dc, batch).loss - std::log(2.0)));
    }
    o.require(worst_sft < 1e-5, "sft rel err " + fmt("%.3g", worst_sft));
    o.require(worst_dpo < 1e-5, "dpo rel err " + fmt("%.3g", worst_dpo));
    o.require(worst_anchor <= 1e-12, "ln2 anchor off by " + fmt("%.3g", worst_anchor));
    if (o.pass)
        o.detail = "max rel err sft " + fmt("%.2g", worst_sft) + ", dpo " + fmt("%.2g", worst_dpo) + "; |L-ln2| " +
                   fmt("%.2g", worst_anchor);
    return o;
}

Outcome training_direction() {
    Outcome o;
    const auto p = corpus::preset("desk-scale");
    auto cfg = p.config;
    cfg.seed = 1;
    auto c = corpus::generate(cfg);
    const double noise = corpus::calibrate_noise(c.examples, 0.8);
    corpus::resample_truth(c.examples, noise, 1);
    const double bayes = corpus::bayes_optimal_accuracy(c.examples, noise);
    o.require(std::abs(bayes - 0.8) <= 0.01, "bayes accuracy " + fmt("%.4f", bayes));

    const auto sp = corpus::split(c.examples, p.fractions, 1);
    policy::TrainData data;
    data.sft = policy::option_items(sp.train);
    data.pairs = policy::pair_items(sp.train, 1);
    const auto val = policy::option_items(sp.val);
    const auto test = policy::option_items(sp.test);
    const double random_ips = metrics::expected_random_baseline(sp.test).ips;

    policy::TrainConfig sft_cfg;
    sft_cfg.seed = 1;
    const auto sft = policy::train(sft_cfg, data, val, policy::PolicyParams::zeros());
    const double sft_ips = policy::score_policy(sft.params.weights, test).ips;

    policy::TrainConfig dpo_cfg;
    dpo_cfg.objective = policy::Objective::dpo;
    dpo_cfg.seed = 1;
    const auto dpo = policy::train(dpo_cfg, data, val, sft.params);
    const double dpo_ips = policy::score_policy(dpo.params.weights, test).ips;

    o.require(sft_ips >= 1.2 * random_ips,
              "sft test ips " + fmt("%.4f", sft_ips) + " < 1.2 x random " + fmt("%.4f", random_ips));
    o.require(dpo_ips >= 0.99 * sft_ips,
              "dpo test ips " + fmt("%.4f", dpo_ips) + " below 99% of sft " + fmt("%.4f", sft_ips));
    if (o.pass)
        o.detail = "noise " + fmt("%.4f", noise) + " bayes " + fmt("%.4f", bayes) + "; test ips random " +
                   fmt("%.3f", random_ips) + ", sft " + fmt("%.3f", sft_ips) + " (lr " +
                   fmt("%g", sft.params.lr) + "), dpo " + fmt("%.3f", dpo_ips) + " (lr " + fmt("%g", dpo.params.lr) + ", epoch " +
                   std::to_string(dpo.runs[dpo.best_run].best_epoch) + ")";
    return o;
}

Outcome extraction_robustness() {
    Outcome o;
    auto cfg = corpus::preset("desk-scale").config;
    cfg.seed = 5;
    const auto catalog = corpus::synth_catalog(cfg);
    std::mt19937_64 rng(5);

    std::size_t exact_ok = 0, exact_n = 0;
    for (const auto& t : catalog) {
        std::vector<std::string> caps;
        for (const auto& a : t.options) caps.push_back(a.caption);
        const extract::CandidateIndex index(caps);
        for (std::size_t j = 0; j < caps.size(); ++j) {
            ++exact_n;
            if (index.match(std::string(prompt::kGuidedPrefix) + backend::answer_continuation(caps[j])).option_id ==
                static_cast<int>(j) + 1)
                ++exact_ok;
        }
    }

    std::size_t drop_ok = 0;
    const std::size_t trials = 10000;
    std::uniform_int_distribution<std::size_t> pick_title(0, catalog.size() - 1);
    std::bernoulli_distribution drop(0.1);
    for (std::size_t t = 0; t < trials; ++t) {
        const auto& title = catalog[pick_title(rng)];
        std::vector<std::string> caps;
        for (const auto& a : title.options) caps.push_back(a.caption);
        const auto j = std::uniform_int_distribution<std::size_t>(0, caps.size() - 1)(rng);
        std::istringstream words(caps[j]);
        std::string kept, w;
        while (words >> w) {
            if (drop(rng)) continue;
            if (!kept.empty()) kept += ' ';
            kept += w;
        }
        if (extract::extract_prediction(kept, caps).option_id == static_cast<int>(j) + 1) ++drop_ok;
    }

    const std::vector<std::string> twins = {"the quiet harbor at dawn glows", "a storm over the city skyline",
                                            "the quiet harbor at dawn glows"};
    const auto tie = extract::extract_prediction("the quiet harbor at dawn glows", twins);
    const auto none = extract::extract_prediction("nothing in common here", twins);

    o.require(exact_ok == exact_n, "exact " + std::to_string(exact_ok) + "/" + std::to_string(exact_n));
    const double drop_rate = static_cast<double>(drop_ok) / trials;
    o.require(drop_rate >= 0.99, "dropout recovery " + fmt("%.4f", drop_rate));
    o.require(tie.option_id == 1 && tie.tie, "duplicate-caption tie not resolved to id 1 with flag");
    o.require(none.option_id == 1 && none.tie, "all-zero scores not resolved to id 1 with flag");
    if (o.pass)
        o.detail = "exact " + std::to_string(exact_ok) + "/" + std::to_string(exact_n) + ", 10% dropout " +
                   std::to_string(drop_ok) + "/" + std::to_string(trials);
    return o;
}

Outcome position_bias() {
    Outcome o;
    const auto p = corpus::preset("desk-scale");
    auto cfg = p.config;
    cfg.seed = 6;
    const auto c = corpus::generate(cfg);
    const auto test = corpus::split(c.examples, p.fractions, 6).test;
    backend::InferenceOptions opts;
    opts.seed = 6;
    const auto log = backend::run_inference(backend::MockFixed{}, test, opts);
    const auto report = metrics::evaluate(log, {}, "fixed");

    std::size_t nonzero_above_1 = 0;
    for (const auto& [label, s] : report.per_label)
        if (label > 1 && s.correct > 0) ++nonzero_above_1;
    const auto& l1 = report.per_label.at(1);
    o.require(nonzero_above_1 == 0, std::to_string(nonzero_above_1) + " labels > 1 with hits");
    o.require(l1.accuracy == 1.0, "label 1 accuracy " + fmt("%.4f", l1.accuracy));
    o.require(report.position_bias.flagged, "pattern not flagged");
    o.require(report.position_bias.cutoff_label == 1,
              "cutoff label " + std::to_string(report.position_bias.cutoff_label));
    if (o.pass)
        o.detail = std::to_string(report.per_label.size()) + " labels, flagged above label " +
                   std::to_string(report.position_bias.cutoff_label) + " over " +
                   std::to_string(report.position_bias.rows_above) + " rows";
    return o;
}

Outcome distillation_filter() {
    Outcome o;
    auto cfg = corpus::preset("desk-scale").config;
    cfg.n_examples = 10000;
    cfg.seed = 7;
    const auto c = corpus::generate(cfg);
    o.require(c.examples.size() == 10000, "corpus size " + std::to_string(c.examples.size()));
    auto lookup = std::make_shared<backend::ExampleLookup>(c.examples);
    const backend::MockOracle teacher(lookup, 0.02);
    backend::DistillOptions opts;
    opts.seed = 7;
    const auto d = backend::distill_reasoning(c.examples, teacher, opts);

    std::size_t replay_bad = 0;
    for (const auto& ex : c.examples.examples) {
        auto it = d.reasonings.find(ex.key());
        if (it == d.reasonings.end()) continue;
        if (backend::replay_prediction(teacher, ex, it->second, opts).option_id != ex.truth_index) ++replay_bad;
    }
    o.require(std::abs(d.stats.filter_rate - 0.02) <= 0.005, "filter rate " + fmt("%.4f", d.stats.filter_rate));
    o.require(d.stats.errors == 0, std::to_string(d.stats.errors) + " backend errors");
    o.require(d.reasonings.size() == d.stats.accepted, "accepted count mismatch");
    o.require(replay_bad == 0, std::to_string(replay_bad) + " accepted reasonings replay to a wrong option");
    if (o.pass)
        o.detail = "filter rate " + fmt("%.4f", d.stats.filter_rate) + ", " + std::to_string(d.stats.accepted) +
                   " accepted, all replay to truth";
    return o;
}

Outcome data_discipline() {
    Outcome o;
    auto p = corpus::preset("desk-scale");
    p.config.n_users = 1000;
    p.config.n_titles = 300;
    p.config.n_examples = 10000;
    p.config.seed = 8;
    const auto c = corpus::generate(p.config);

    std::size_t overlap_seeds = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto sp = corpus::split(c.examples, p.fractions, seed);
        std::set<std::string> seen;
        std::size_t total = 0;
        for (const auto* part : {&sp.train, &sp.val, &sp.test}) {
            for (const auto& ex : part->examples) seen.insert(ex.key());
            total += part->size();
        }
        if (seen.size() != total || total != c.examples.size()) ++overlap_seeds;
    }
    o.require(overlap_seeds == 0, std::to_string(overlap_seeds) + " seeds with overlap or loss");

    auto dump = [](const prompt::Export& e) {
        std::ostringstream out;
        prompt::write_jsonl(e.records, out);
        return out.str();
    };
    const auto sp = corpus::split(c.examples, p.fractions, 8);
    const std::string sft_a = dump(prompt::export_sft(sp.train)), sft_b = dump(prompt::export_sft(sp.train));
    const std::string dpo_a = dump(prompt::export_dpo(sp.train, 8)), dpo_b = dump(prompt::export_dpo(sp.train, 8));
    o.require(sft_a == sft_b && dpo_a == dpo_b, "exports differ between runs");

    std::ostringstream first, second;
    for (const auto& ex : c.examples.examples) first << corpus::example_to_json_line(ex) << '\n';
    {
        std::istringstream in(first.str());
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) second << corpus::example_to_json_line(corpus::example_from_json_line(line, ++n)) << '\n';
    }
    o.require(first.str() == second.str(), "corpus JSONL not byte-stable through load/save");

    std::size_t round_trip_ok = 0;
    for (const auto& ex : c.examples.examples) {
        const auto rec = prompt::render_prompt(ex);
        const auto parsed = prompt::parse_prompt(rec.prompt_text);
        bool ok = parsed.size() == ex.title->options.size();
        for (std::size_t j = 0; ok && j < parsed.size(); ++j)
            ok = parsed[j].option_id == static_cast<int>(j) + 1 && parsed[j].caption == ex.title->options[j].caption;
        if (ok) ++round_trip_ok;
    }
    o.require(round_trip_ok == c.examples.size(),
              "render/parse " + std::to_string(round_trip_ok) + "/" + std::to_string(c.examples.size()));
    if (o.pass)
        o.detail = "100 seeds disjoint, exports byte-stable, render/parse " + std::to_string(round_trip_ok) + "/" +
                   std::to_string(c.examples.size());
    return o;
}

}  // namespace

int main() {
    run("AC1", "metric identities", 10, metric_identities);
    run("AC2", "ips weighting", 1, ips_weighting);
    run("AC3", "loss correctness", 30, loss_correctness);
    run("AC4", "training direction", 300, training_direction);
    run("AC5", "extraction robustness", 30, extraction_robustness);
    run("AC6", "position-bias detector", 60, position_bias);
    run("AC7", "distillation filter", 60, distillation_filter);
    run("AC8", "data discipline", 60, data_discipline);
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
