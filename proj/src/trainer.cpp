#include "artrec/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "artrec/error.hpp"
#include "artrec/numeric.hpp"

namespace artrec::policy {

std::vector<double> llm_lr_grid() { return {1e-7, 5e-7, 1e-6, 5e-6, 1e-5, 1e-4}; }

std::vector<double> default_lr_grid() {
    auto grid = llm_lr_grid();
    for (double lr : {1e-3, 1e-2, 1e-1, 1.0, 3.0}) grid.push_back(lr);
    return grid;
}

ValidationScore score_policy(const Eigen::VectorXd& weights, const ValidationSet& val) {
    if (val.empty()) throw ValidationError("empty validation set");
    CompensatedSum correct, weighted;
    for (const auto& item : val) {
        if (predict(weights, item.features) == item.truth) {
            correct += 1.0;
            weighted += static_cast<double>(item.features.rows());
        }
    }
    const double n = static_cast<double>(val.size());
    return {correct.value() / n, weighted.value() / n};
}

TrainResult train(const TrainConfig& config, const TrainData& data, const ValidationSet& val, const PolicyParams& init) {
    if (config.lr_grid.empty()) throw ConfigError("lr_grid", "must not be empty");
    if (config.max_epochs < 0) throw ConfigError("max_epochs", "must be >= 0");
    if (config.patience < 1) throw ConfigError("patience", "must be >= 1");
    const bool dpo = config.objective == Objective::dpo;
    if (dpo && !(config.beta > 0.0)) throw ConfigError("beta", "must be > 0");
    if (dpo ? data.pairs.empty() : data.sft.empty()) throw ValidationError("no training data");

    // The reference policy is the initialization, frozen.
    std::vector<double> margins;
    if (dpo) margins = reference_margins(init.weights, data.pairs);
    auto loss_at = [&](const Eigen::VectorXd& w) {
        return dpo ? dpo_loss_with_margins(w, config.beta, data.pairs, margins) : sft_loss(w, data.sft);
    };

    const ValidationScore init_score = score_policy(init.weights, val);
    TrainResult result;
    for (double lr : config.lr_grid) {
        if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr_grid", "learning rates must be finite and >= 0");
        LrRun run;
        run.lr = lr;
        run.best_weights = init.weights;
        run.best_val_accuracy = init_score.accuracy;
        run.best_val_ips = init_score.ips;

        Eigen::VectorXd w = init.weights;
        int since_best = 0;
        for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
            const LossGrad lg = loss_at(w);
            if (!std::isfinite(lg.loss) || !lg.grad.allFinite()) {
                run.failed = true;
                break;
            }
            w -= lr * lg.grad;
            run.epochs_run = epoch;
            run.final_loss = lg.loss;
            if (!w.allFinite()) {
                run.failed = true;
                break;
            }
            const ValidationScore s = score_policy(w, val);
            if (s.ips > run.best_val_ips) {
                run.best_val_ips = s.ips;
                run.best_val_accuracy = s.accuracy;
                run.best_epoch = epoch;
                run.best_weights = w;
                since_best = 0;
            } else if (++since_best >= config.patience) {
                break;
            }
        }
        if (!run.failed && config.max_epochs > 0) {
            const double last = loss_at(w).loss;
            if (!std::isfinite(last)) run.failed = true;
            else run.final_loss = last;
        }
        result.runs.push_back(std::move(run));
    }

    bool found = false;
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
        const auto& r = result.runs[i];
        if (r.failed) continue;
        if (!found || r.best_val_ips > result.runs[result.best_run].best_val_ips) {
            result.best_run = i;
            found = true;
        }
    }
    if (!found) throw TrainingError("every learning rate diverged");

    const auto& best = result.runs[result.best_run];
    result.params.weights = best.best_weights;
    result.params.objective = std::string(to_string(config.objective));
    result.params.lr = best.lr;
    result.params.seed = config.seed;
    result.params.parent_checkpoint = config.init_checkpoint;
    return result;
}

std::string render_lr_table(const TrainResult& result) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%10s  %7s  %10s  %12s  %9s  %9s  %s\n", "lr", "epochs", "best_epoch",
                  "final_loss", "val_acc", "val_ips", "status");
    out << line;
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
        const auto& r = result.runs[i];
        const char* status = r.failed ? "diverged" : (i == result.best_run ? "selected" : "");
        std::snprintf(line, sizeof line, "%10.1e  %7d  %10d  %12.6f  %9.4f  %9.4f  %s\n", r.lr, r.epochs_run,
                      r.best_epoch, r.final_loss, r.best_val_accuracy, r.best_val_ips, status);
        out << line;
    }
    return out.str();
}

}  // namespace artrec::policy
