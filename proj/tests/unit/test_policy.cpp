#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "artrec/error.hpp"
#include "artrec/features.hpp"
#include "artrec/policy.hpp"
#include "artrec/prompt.hpp"
#include "artrec/trainer.hpp"
#include "helpers.hpp"

using namespace artrec;
using namespace artrec::policy;

namespace {

constexpr int F = FeatureLayout::dim();

Eigen::VectorXd random_vec(std::mt19937_64& rng, int n, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = g(rng);
    return v;
}

Eigen::MatrixXd random_features(std::mt19937_64& rng, int m) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd phi(m, F);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < F; ++j) phi(i, j) = g(rng);
    return phi;
}

std::vector<OptionItem> random_sft_batch(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> msz(2, 9), bsz(1, 6);
    std::vector<OptionItem> batch;
    for (int b = bsz(rng); b > 0; --b) {
        const int m = msz(rng);
        batch.push_back({random_features(rng, m), std::uniform_int_distribution<int>(1, m)(rng)});
    }
    return batch;
}

std::vector<PairItem> random_pair_batch(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> msz(2, 9), bsz(1, 6);
    std::vector<PairItem> batch;
    for (int b = bsz(rng); b > 0; --b) {
        const int m = msz(rng);
        const int c = std::uniform_int_distribution<int>(1, m)(rng);
        int r = std::uniform_int_distribution<int>(1, m - 1)(rng);
        if (r >= c) ++r;
        batch.push_back({random_features(rng, m), c, r});
    }
    return batch;
}

// Independent oracle: finite differences of a directly coded Eq. 3 loss.
double naive_sft(const Eigen::VectorXd& w, const std::vector<OptionItem>& batch) {
    double total = 0.0;
    for (const auto& it : batch) {
        const Eigen::VectorXd s = it.features * w;
        double z = 0.0;
        for (int j = 0; j < s.size(); ++j) z += std::exp(s[j]);
        total += -(s[it.truth - 1] - std::log(z));
    }
    return total / static_cast<double>(batch.size());
}

}  // namespace

TEST_CASE("logprobs: uniform, shift invariance, logistic identity") {
    std::mt19937_64 rng(1);
    const auto phi = random_features(rng, 7);
    const auto lp = policy_logprobs(Eigen::VectorXd::Zero(F), phi);
    for (int j = 0; j < 7; ++j) CHECK(lp[j] == doctest::Approx(-std::log(7.0)).epsilon(1e-14));

    const auto w = random_vec(rng, F);
    const auto base = policy_logprobs(w, phi);
    CHECK(std::abs(base.array().exp().sum() - 1.0) < 1e-12);
    // a constant column added to every option's features shifts all scores equally
    Eigen::MatrixXd shifted = phi;
    shifted.col(0).array() += 3.7;
    const auto lp2 = policy_logprobs(w, shifted);
    CHECK((lp2 - base).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::MatrixXd two = Eigen::MatrixXd::Zero(2, F);
    two(0, 0) = 1.0;
    Eigen::VectorXd w1 = Eigen::VectorXd::Zero(F);
    w1[0] = 1.3;  // gap 1.3
    CHECK(std::exp(policy_logprobs(w1, two)[0]) == doctest::Approx(1.0 / (1.0 + std::exp(-1.3))).epsilon(1e-14));

    Eigen::MatrixXd bad = phi;
    bad(0, 0) = std::nan("");
    CHECK_THROWS(policy_logprobs(w, bad));
}

TEST_CASE("sft loss anchors and limits") {
    std::mt19937_64 rng(2);
    std::vector<OptionItem> batch;
    for (int i = 0; i < 5; ++i) batch.push_back({random_features(rng, 4), 1 + i % 4});
    CHECK(sft_loss(Eigen::VectorXd::Zero(F), batch).loss == doctest::Approx(std::log(4.0)).epsilon(1e-14));

    // pushing the truth score up drives loss to 0 monotonically
    std::vector<OptionItem> one;
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(3, F);
    phi(1, 0) = 1.0;
    one.push_back({phi, 2});
    double prev = 1e9;
    for (double t : {0.0, 1.0, 5.0, 20.0, 60.0}) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(F);
        w[0] = t;
        const double l = sft_loss(w, one).loss;
        CHECK(l < prev);
        prev = l;
    }
    CHECK(prev < 1e-20);
    CHECK_THROWS(sft_loss(Eigen::VectorXd::Zero(F), std::vector<OptionItem>{}));
}

TEST_CASE("grad_check on a linear function is exact") {
    std::mt19937_64 rng(3);
    const auto x = random_vec(rng, F);
    LossFn lin = [&](const Eigen::VectorXd& w) { return LossGrad{w.dot(x), x}; };
        // no truncation error for a linear function, so a unit step only leaves rounding
    CHECK(grad_check(lin, random_vec(rng, F), 1.0) < 1e-10);
    CHECK_THROWS(grad_check(lin, random_vec(rng, F), 0.0));
}

TEST_CASE("sft gradient matches finite differences on 100 instances") {
    std::mt19937_64 rng(4);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto batch = random_sft_batch(rng);
        const auto w = random_vec(rng, F, 0.3);
        worst = std::max(worst, grad_check([&](const Eigen::VectorXd& v) { return sft_loss(v, batch); }, w, 1e-5));
        CHECK(sft_loss(w, batch).loss == doctest::Approx(naive_sft(w, batch)).epsilon(1e-12));
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("dpo loss anchors, gradient and scaling") {
    std::mt19937_64 rng(5);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto batch = random_pair_batch(rng);
        DpoConfig cfg;
        cfg.beta = std::uniform_real_distribution<double>(0.01, 2.0)(rng);
        cfg.ref.weights = random_vec(rng, F, 0.3);
        const auto w = random_vec(rng, F, 0.3);
        worst = std::max(worst,
                         grad_check([&](const Eigen::VectorXd& v) { return dpo_loss(v, cfg, batch); }, w, 1e-5));
    }
    CHECK(worst < 1e-5);

    for (int trial = 0; trial < 20; ++trial) {
        const auto batch = random_pair_batch(rng);
        DpoConfig cfg;
        cfg.beta = std::uniform_real_distribution<double>(0.01, 5.0)(rng);
        cfg.ref.weights = random_vec(rng, F);
        CHECK(std::abs(dpo_loss(cfg.ref.weights, cfg, batch).loss - std::log(2.0)) <= 1e-12);
    }

    const auto batch = random_pair_batch(rng);
    DpoConfig a, b;
    a.ref.weights = b.ref.weights = random_vec(rng, F);
    a.beta = 0.1;
    b.beta = 0.7;
    const auto ga = dpo_loss(a.ref.weights, a, batch).grad;
    const auto gb = dpo_loss(b.ref.weights, b, batch).grad;
    // at the reference the gradient is beta * sigma(0) * (shared direction)
    CHECK((gb - ga * (0.7 / 0.1)).cwiseAbs().maxCoeff() < 1e-12);

    // a small step from the reference decreases the loss
    const auto g = dpo_loss(a.ref.weights, a, batch).grad;
    CHECK(dpo_loss(a.ref.weights - 1e-3 * g, a, batch).loss < std::log(2.0));

    DpoConfig bad;
    bad.beta = 0.0;
    bad.ref.weights = Eigen::VectorXd::Zero(F);
    CHECK_THROWS_AS(dpo_loss(bad.ref.weights, bad, batch), ConfigError);
}

TEST_CASE("dpo loss vanishes as the margin grows") {
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(3, F);
    phi(0, 0) = 1.0;
    std::vector<PairItem> batch = {{phi, 1, 2}};
    DpoConfig cfg;
    cfg.beta = 0.5;
    cfg.ref.weights = Eigen::VectorXd::Zero(F);
    double prev = 1.0;
    for (double t : {1.0, 10.0, 100.0, 1000.0}) {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(F);
        w[0] = t;
        const double l = dpo_loss(w, cfg, batch).loss;
        CHECK(l < prev);
        prev = l;
    }
    CHECK(prev < 1e-100);
}

TEST_CASE("sft on a separable toy batch reaches training accuracy 1") {
    std::mt19937_64 rng(6);
    std::vector<OptionItem> batch;
    for (int i = 0; i < 30; ++i) {
        Eigen::MatrixXd phi = random_features(rng, 4) * 0.1;
        const int truth = 1 + i % 4;
        phi(truth - 1, 3) += 1.0;
        batch.push_back({phi, truth});
    }
    TrainConfig cfg;
    cfg.lr_grid = {1.0};
    cfg.patience = 200;
    TrainData data;
    data.sft = batch;
    const auto r = train(cfg, data, batch, PolicyParams::zeros());
    CHECK(score_policy(r.params.weights, batch).accuracy == 1.0);
}

TEST_CASE("trainer: zero lr returns the init; determinism; divergence") {
    const auto corpus = corpus::generate(testutil::small_config());
    const auto sp = corpus::split(corpus.examples, {0.8, 0.1, 0.1}, 1);
    TrainData data;
    data.sft = option_items(sp.train);
    const auto val = option_items(sp.val);

    TrainConfig zero;
    zero.lr_grid = {0.0};
    const auto init = heuristic_params();
    const auto r0 = train(zero, data, val, init);
    CHECK(r0.params.weights == init.weights);

    TrainConfig cfg;
    cfg.lr_grid = {0.1, 1.0};
    cfg.max_epochs = 30;
    const auto a = train(cfg, data, val, PolicyParams::zeros());
    const auto b = train(cfg, data, val, PolicyParams::zeros());
    CHECK(a.params.weights == b.params.weights);
    CHECK(a.params.objective == "sft");
    CHECK(render_lr_table(a).find("selected") != std::string::npos);

    // huge features and step overflow the weights on the first update
    TrainData wild;
    wild.sft.push_back({Eigen::MatrixXd::Constant(3, F, 1e200), 1});
    wild.sft.back().features(1, 0) = -1e200;
    TrainConfig blow;
    blow.lr_grid = {1e200};
    blow.max_epochs = 5;
    CHECK_THROWS_AS(train(blow, wild, val, PolicyParams::zeros()), TrainingError);
    blow.lr_grid = {1e200, 0.0};
    const auto mixed = train(blow, wild, val, PolicyParams::zeros());
    CHECK(mixed.runs[0].failed);
    CHECK(mixed.best_run == 1);

    TrainConfig empty;
    empty.lr_grid = {};
    CHECK_THROWS_AS(train(empty, data, val, PolicyParams::zeros()), ConfigError);
}

TEST_CASE("features are finite with fixed dimension; pairs match dpo export") {
    const auto corpus = corpus::generate(testutil::small_config());
    for (const auto& ex : corpus.examples.examples) {
        const auto phi = option_features(ex);
        CHECK(phi.rows() == ex.m());
        CHECK(phi.cols() == F);
        CHECK(phi.allFinite());
    }
    const auto pairs = pair_items(corpus.examples, 3);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        CHECK(pairs[i].chosen == corpus.examples.examples[i].truth_index);
        CHECK(pairs[i].rejected == prompt::dpo_rejected_option(corpus.examples.examples[i], 3));
    }
}

TEST_CASE("checkpoint round trip") {
    testutil::TempDir dir;
    PolicyParams p = heuristic_params();
    p.objective = "sft";
    p.lr = 0.5;
    p.seed = 9;
    p.parent_checkpoint = "init.json";
    save_checkpoint(p, dir / "c.json");
    const auto q = load_checkpoint(dir / "c.json");
    CHECK(q.weights == p.weights);
    CHECK(q.objective == "sft");
    CHECK(q.lr == 0.5);
    CHECK(q.seed == 9);
    CHECK(q.parent_checkpoint == "init.json");
    std::ofstream(dir / "bad.json") << R"({"weights":[1,2],"objective":"sft","lr":0,"seed":0,"parent_checkpoint":null})";
    CHECK_THROWS(load_checkpoint(dir / "bad.json"));
}
