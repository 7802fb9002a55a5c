#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "artrec/corpus.hpp"
#include "artrec/error.hpp"

namespace artrec::metrics {

struct PredictionRow {
    std::string example_key;
    int predicted_id = 0;  // 1..m; 0 only when failed
    int truth_index = 0;   // 1..m
    int m = 0;
    double score = 0.0;  // extraction score, informational
    bool tie = false;
    bool failed = false;  // backend error; always counted as incorrect

    bool correct() const noexcept { return !failed && predicted_id == truth_index; }
    bool operator==(const PredictionRow&) const = default;
};

using PredictionLog = std::vector<PredictionRow>;

/// Throws ValidationError for rows with ids outside 1..m or m < 2.
void validate_log(const PredictionLog& log);

void write_log(const PredictionLog& log, const std::filesystem::path& path);
PredictionLog read_log(const std::filesystem::path& path);

/// Probability that the logging policy showed the ground-truth artwork.
struct PropensityModel {
    enum class Kind { uniform };
    Kind kind = Kind::uniform;

    double probability(int truth_index, int m) const;
    /// 1 / probability, computed exactly (1.0 / (1.0 / 49) != 49 in doubles).
    /// Zero when the probability is zero.
    double weight(int truth_index, int m) const;
};

double accuracy(const PredictionLog& log);
double ips(const PredictionLog& log, const PropensityModel& propensity = {});

struct LabelStats {
    std::size_t count = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
    double chance_hits = 0.0;  // expected correct rows under uniform random guessing, sum of 1/m
};

struct SizeStats {
    std::size_t count = 0;
    double accuracy = 0.0;
    double ips = 0.0;
};

std::map<int, LabelStats> breakdown_by_label(const PredictionLog& log);
std::map<int, SizeStats> breakdown_by_m(const PredictionLog& log, const PropensityModel& propensity = {});

/// Labels above `cutoff_label` are never predicted correctly although a
/// uniform guesser would be expected to hit them at least `min_chance_hits`
/// times: the signature of a policy biased toward early positions.
struct PositionBiasFinding {
    bool flagged = false;
    int cutoff_label = 0;
    std::size_t rows_above = 0;
    double chance_hits_above = 0.0;
};

PositionBiasFinding detect_position_bias(const std::map<int, LabelStats>& per_label, double min_chance_hits = 10.0);

struct EvalReport {
    std::string name;
    std::size_t n = 0;
    std::size_t failed = 0;
    double accuracy = 0.0;
    double ips = 0.0;
    std::map<int, LabelStats> per_label;
    std::map<int, SizeStats> per_m;
    PositionBiasFinding position_bias;
    std::string keys_digest;  // sha256 over sorted example keys
    std::optional<std::string> baseline_name;
    std::optional<double> rel_accuracy_pct;
    std::optional<double> rel_ips_pct;
};

EvalReport evaluate(const PredictionLog& log, const PropensityModel& propensity = {}, std::string name = {});

std::string keys_digest(const PredictionLog& log);

/// Key-set mismatch between two logs; what() carries a diff summary.
class KeyMismatchError : public ValidationError {
public:
    KeyMismatchError(const std::string& summary, std::size_t only_left, std::size_t only_right)
        : ValidationError(summary), only_left_(only_left), only_right_(only_right) {}

    std::size_t only_left() const noexcept { return only_left_; }
    std::size_t only_right() const noexcept { return only_right_; }

private:
    std::size_t only_left_;
    std::size_t only_right_;
};

/// Throws KeyMismatchError unless both logs cover the same example keys.
void require_same_keys(const PredictionLog& candidate, const PredictionLog& baseline);

/// 100 * (candidate - baseline) / baseline for accuracy and IPS.
std::pair<double, double> relative_improvement(const EvalReport& candidate, const EvalReport& baseline);

/// Fills the relative fields of `candidate` against `baseline`.
void attach_baseline(EvalReport& candidate, const EvalReport& baseline);

struct RandomBaseline {
    double accuracy = 0.0;
    double ips = 0.0;
};

/// Closed-form expectation of the uniform-random policy.
RandomBaseline expected_random_baseline(std::span<const int> set_sizes);
RandomBaseline expected_random_baseline(const corpus::ExampleSet& examples);

// --- rendering ----------------------------------------------------------

std::string to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
std::string render_table(const EvalReport& report);
/// `label,count,accuracy`
std::string label_breakdown_csv(const EvalReport& report);

struct ReportEntry {
    std::string method;
    EvalReport report;
};

/// Rows of relative accuracy/IPS change against the named baseline entry.
std::string render_comparison(const std::vector<ReportEntry>& entries, const std::string& baseline_method);

}  // namespace artrec::metrics
