#include "artrec/policy.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "artrec/error.hpp"
#include "artrec/features.hpp"
#include "artrec/numeric.hpp"
#include "artrec/prompt.hpp"

namespace artrec::policy {
namespace {

Eigen::VectorXd log_softmax(const Eigen::VectorXd& scores) {
    const double hi = scores.maxCoeff();
    const double lse = hi + std::log((scores.array() - hi).exp().sum());
    return scores.array() - lse;
}

void check_dims(const Eigen::VectorXd& w, const Eigen::MatrixXd& phi) {
    if (phi.cols() != w.size()) throw ValidationError("feature dimension does not match weights");
    if (phi.rows() < 1) throw ValidationError("empty candidate set");
}

}  // namespace

std::string_view to_string(Objective o) { return o == Objective::sft ? "sft" : "dpo"; }

Objective parse_objective(std::string_view s) {
    if (s == "sft") return Objective::sft;
    if (s == "dpo") return Objective::dpo;
    throw ConfigError("objective", "expected sft or dpo, got '" + std::string(s) + "'");
}

PolicyParams PolicyParams::zeros() {
    PolicyParams p;
    p.weights = Eigen::VectorXd::Zero(FeatureLayout::dim());
    return p;
}

PolicyParams heuristic_params() {
    PolicyParams p = PolicyParams::zeros();
    p.weights.head(FeatureLayout::kThemes).setOnes();
    p.objective = "heuristic";
    return p;
}

Eigen::VectorXd policy_logprobs(const Eigen::VectorXd& weights, const Eigen::MatrixXd& features) {
    check_dims(weights, features);
    if (!features.allFinite()) throw ValidationError("non-finite features");
    return log_softmax(features * weights);
}

Eigen::VectorXd policy_logprobs(const PolicyParams& params, const corpus::Example& ex) {
    return policy_logprobs(params.weights, option_features(ex));
}

int predict(const Eigen::VectorXd& weights, const Eigen::MatrixXd& features) {
    check_dims(weights, features);
    const Eigen::VectorXd s = features * weights;
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < s.size(); ++j)
        if (s[j] > s[best]) best = j;
    return static_cast<int>(best) + 1;
}

LossGrad sft_loss(const Eigen::VectorXd& weights, std::span<const OptionItem> batch) {
    if (batch.empty()) throw ValidationError("empty batch");
    LossGrad out{0.0, Eigen::VectorXd::Zero(weights.size())};
    CompensatedSum loss;
    for (const auto& item : batch) {
        check_dims(weights, item.features);
        const Eigen::VectorXd lp = log_softmax(item.features * weights);
        const Eigen::Index t = item.truth - 1;
        loss += -lp[t];
        // d/dw -log p_t = E_p[phi] - phi_t
        out.grad.noalias() += item.features.transpose() * lp.array().exp().matrix();
        out.grad -= item.features.row(t).transpose();
    }
    const double n = static_cast<double>(batch.size());
    out.loss = loss.value() / n;
    out.grad /= n;
    return out;
}

std::vector<double> reference_margins(const Eigen::VectorXd& ref_weights, std::span<const PairItem> batch) {
    std::vector<double> margins;
    margins.reserve(batch.size());
    for (const auto& item : batch) {
        check_dims(ref_weights, item.features);
        const Eigen::VectorXd lp = log_softmax(item.features * ref_weights);
        margins.push_back(lp[item.chosen - 1] - lp[item.rejected - 1]);
    }
    return margins;
}

LossGrad dpo_loss_with_margins(const Eigen::VectorXd& weights, double beta, std::span<const PairItem> batch,
                               std::span<const double> ref_margins) {
    if (!(beta > 0.0)) throw ConfigError("beta", "must be > 0");
    if (batch.empty()) throw ValidationError("empty batch");
    if (ref_margins.size() != batch.size()) throw ValidationError("one reference margin per pair required");
    LossGrad out{0.0, Eigen::VectorXd::Zero(weights.size())};
    CompensatedSum loss;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& item = batch[i];
        check_dims(weights, item.features);
        const Eigen::VectorXd s = item.features * weights;
        // Log-softmax normalizers cancel in the chosen-minus-rejected margin.
        const double margin = s[item.chosen - 1] - s[item.rejected - 1];
        const double z = beta * (margin - ref_margins[i]);
        loss += -log_sigmoid(z);
        const double coef = -beta * sigmoid(-z);
        out.grad += coef * (item.features.row(item.chosen - 1) - item.features.row(item.rejected - 1)).transpose();
    }
    const double n = static_cast<double>(batch.size());
    out.loss = loss.value() / n;
    out.grad /= n;
    return out;
}

LossGrad dpo_loss(const Eigen::VectorXd& weights, const DpoConfig& config, std::span<const PairItem> batch) {
    if (!(config.beta > 0.0)) throw ConfigError("beta", "must be > 0");
    return dpo_loss_with_margins(weights, config.beta, batch, reference_margins(config.ref.weights, batch));
}

double grad_check(const LossFn& loss, const Eigen::VectorXd& weights, double eps) {
    if (!(eps > 0.0)) throw ConfigError("eps", "must be > 0");
    const Eigen::VectorXd analytic = loss(weights).grad;
    double worst = 0.0;
    Eigen::VectorXd probe = weights;
    for (Eigen::Index k = 0; k < weights.size(); ++k) {
        probe[k] = weights[k] + eps;
        const double up = loss(probe).loss;
        probe[k] = weights[k] - eps;
        const double down = loss(probe).loss;
        probe[k] = weights[k];
        const double numeric = (up - down) / (2.0 * eps);
        const double a = analytic[k];
        const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-12});
        worst = std::max(worst, std::fabs(a - numeric) / denom);
    }
    return worst;
}

std::vector<OptionItem> option_items(const corpus::ExampleSet& set) {
    std::vector<OptionItem> out;
    out.reserve(set.size());
    for (const auto& ex : set.examples) out.push_back({option_features(ex), ex.truth_index});
    return out;
}

std::vector<PairItem> pair_items(const corpus::ExampleSet& set, std::uint64_t seed) {
    std::vector<PairItem> out;
    out.reserve(set.size());
    for (const auto& ex : set.examples) {
        if (ex.m() < 2) continue;
        out.push_back({option_features(ex), ex.truth_index, prompt::dpo_rejected_option(ex, seed)});
    }
    return out;
}

void save_checkpoint(const PolicyParams& params, const std::filesystem::path& path, const std::string& extra_json) {
    nlohmann::ordered_json j;
    j["weights"] = std::vector<double>(params.weights.data(), params.weights.data() + params.weights.size());
    j["objective"] = params.objective;
    j["lr"] = params.lr;
    j["seed"] = params.seed;
    j["parent_checkpoint"] = params.parent_checkpoint.empty() ? nlohmann::ordered_json(nullptr)
                                                              : nlohmann::ordered_json(params.parent_checkpoint);
    j["feature_dim"] = params.weights.size();
    const auto extra = nlohmann::ordered_json::parse(extra_json);
    for (const auto& [k, v] : extra.items()) j[k] = v;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

PolicyParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    PolicyParams p;
    try {
        const auto j = nlohmann::json::parse(buf.str());
        const auto w = j.at("weights").get<std::vector<double>>();
        p.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
        p.objective = j.at("objective").get<std::string>();
        p.lr = j.at("lr").get<double>();
        p.seed = j.at("seed").get<std::uint64_t>();
        if (!j.at("parent_checkpoint").is_null()) p.parent_checkpoint = j["parent_checkpoint"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed checkpoint: ") + e.what(), 0, path.string());
    }
    if (p.weights.size() != FeatureLayout::dim())
        throw ValidationError("checkpoint has " + std::to_string(p.weights.size()) + " weights, expected " +
                              std::to_string(FeatureLayout::dim()));
    if (!p.weights.allFinite()) throw ValidationError("checkpoint weights are not finite");
    return p;
}

}  // namespace artrec::policy
