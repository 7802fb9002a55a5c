#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "artrec/policy.hpp"

namespace artrec::policy {

/// Learning rates searched for the LLM runs this toolkit mirrors.
std::vector<double> llm_lr_grid();

/// Default grid for the log-linear policy: the LLM grid extended upward,
/// since full-batch steps on a 34-weight model tolerate much larger rates.
std::vector<double> default_lr_grid();

struct TrainConfig {
    Objective objective = Objective::sft;
    std::vector<double> lr_grid = default_lr_grid();
    int max_epochs = 200;
    int patience = 20;  // epochs without validation IPS gain before stopping
    double beta = 0.1;  // dpo only
    std::uint64_t seed = 0;
    std::string init_checkpoint;  // lineage, recorded in the result
};

struct TrainData {
    std::vector<OptionItem> sft;   // used when objective == sft
    std::vector<PairItem> pairs;   // used when objective == dpo
};

/// Validation rows carry candidate-set size via the feature matrix height.
using ValidationSet = std::vector<OptionItem>;

struct ValidationScore {
    double accuracy = 0.0;
    double ips = 0.0;
};

/// Argmax-policy accuracy and uniform-propensity IPS.
ValidationScore score_policy(const Eigen::VectorXd& weights, const ValidationSet& val);

struct LrRun {
    double lr = 0.0;
    bool failed = false;
    int epochs_run = 0;
    int best_epoch = 0;  // 0 means the initialization itself
    double final_loss = 0.0;
    double best_val_accuracy = 0.0;
    double best_val_ips = 0.0;
    Eigen::VectorXd best_weights;
};

struct TrainResult {
    PolicyParams params;
    std::vector<LrRun> runs;
    std::size_t best_run = 0;
};

/// Full-batch gradient descent per learning rate with early stopping on
/// validation IPS. Returns the best validation checkpoint across the grid.
/// Runs whose loss turns non-finite are marked failed; if all fail, throws
/// TrainingError.
TrainResult train(const TrainConfig& config, const TrainData& data, const ValidationSet& val, const PolicyParams& init);

/// Plain-text table, one row per learning rate.
std::string render_lr_table(const TrainResult& result);

}  // namespace artrec::policy
