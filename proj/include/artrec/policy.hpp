#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "artrec/corpus.hpp"

namespace artrec::policy {

enum class Objective { sft, dpo };
std::string_view to_string(Objective o);
Objective parse_objective(std::string_view s);

/// Weights of the log-linear option policy pi(a_j) ~ exp(w . phi_j), plus
/// provenance.
struct PolicyParams {
    Eigen::VectorXd weights;
    std::string objective = "init";
    double lr = 0.0;
    std::uint64_t seed = 0;
    std::string parent_checkpoint;  // empty for fresh initializations

    static PolicyParams zeros();
};

/// Hand-set weights that score options by history/caption theme agreement.
/// Serves as the non-learned reference recommender.
PolicyParams heuristic_params();

/// Options of one example with the index of the ground truth (1-based).
struct OptionItem {
    Eigen::MatrixXd features;  // m x F
    int truth = 1;
};

/// A preference pair over one candidate set (1-based ids).
struct PairItem {
    Eigen::MatrixXd features;
    int chosen = 1;
    int rejected = 2;
};

struct DpoConfig {
    double beta = 0.1;
    PolicyParams ref;  // frozen reference policy
};

struct LossGrad {
    double loss = 0.0;
    Eigen::VectorXd grad;
};

/// Log-softmax of option scores.
Eigen::VectorXd policy_logprobs(const Eigen::VectorXd& weights, const Eigen::MatrixXd& features);
Eigen::VectorXd policy_logprobs(const PolicyParams& params, const corpus::Example& ex);

/// Highest-scoring option, lowest id on ties (1-based).
int predict(const Eigen::VectorXd& weights, const Eigen::MatrixXd& features);

/// Mean negative log-likelihood of the ground-truth option and its gradient.
LossGrad sft_loss(const Eigen::VectorXd& weights, std::span<const OptionItem> batch);

/// -mean log sigmoid(beta * (log-ratio of chosen - log-ratio of rejected)),
/// log-ratios taken against the reference policy.
LossGrad dpo_loss(const Eigen::VectorXd& weights, const DpoConfig& config, std::span<const PairItem> batch);

/// Same loss with the reference margins log pi_ref(chosen) - log pi_ref(rejected)
/// precomputed, one per pair.
LossGrad dpo_loss_with_margins(const Eigen::VectorXd& weights, double beta, std::span<const PairItem> batch,
                               std::span<const double> ref_margins);

std::vector<double> reference_margins(const Eigen::VectorXd& ref_weights, std::span<const PairItem> batch);

using LossFn = std::function<LossGrad(const Eigen::VectorXd&)>;

/// Largest |analytic - numeric| / max(|analytic|, |numeric|, 1e-12) over
/// coordinates, numeric by central differences with step eps.
double grad_check(const LossFn& loss, const Eigen::VectorXd& weights, double eps = 1e-5);

// --- data preparation ---------------------------------------------------

std::vector<OptionItem> option_items(const corpus::ExampleSet& set);

/// Pairs with the rejected option drawn the same way as the DPO export.
std::vector<PairItem> pair_items(const corpus::ExampleSet& set, std::uint64_t seed);

// --- checkpoints --------------------------------------------------------

/// {"weights","objective","lr","seed","parent_checkpoint", ...extra}
void save_checkpoint(const PolicyParams& params, const std::filesystem::path& path, const std::string& extra_json = "{}");
PolicyParams load_checkpoint(const std::filesystem::path& path);

}  // namespace artrec::policy
