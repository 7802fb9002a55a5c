#include "artrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "artrec/hashing.hpp"
#include "artrec/numeric.hpp"

namespace artrec::metrics {
namespace {

using ojson = nlohmann::ordered_json;

void require_nonempty(const PredictionLog& log) {
    if (log.empty()) throw ValidationError("no predictions");
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string pct(double v) { return fmt("%+.2f%%", v); }

}  // namespace

void validate_log(const PredictionLog& log) {
    for (std::size_t i = 0; i < log.size(); ++i) {
        const auto& r = log[i];
        if (r.m < 2) throw ValidationError("m must be >= 2", i + 1, "m");
        if (r.truth_index < 1 || r.truth_index > r.m) throw ValidationError("truth_index out of range", i + 1, "truth_index");
        if (!r.failed && (r.predicted_id < 1 || r.predicted_id > r.m))
            throw ValidationError("predicted_id out of range", i + 1, "predicted_id");
    }
}

void write_log(const PredictionLog& log, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& r : log) {
        ojson j;
        j["example_key"] = r.example_key;
        j["predicted_id"] = r.predicted_id;
        j["score"] = r.score;
        j["tie"] = r.tie;
        j["truth_index"] = r.truth_index;
        j["m"] = r.m;
        j["failed"] = r.failed;
        out << j.dump() << '\n';
    }
}

PredictionLog read_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    PredictionLog log;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            PredictionRow r;
            r.example_key = j.at("example_key").get<std::string>();
            r.predicted_id = j.at("predicted_id").get<int>();
            r.score = j.value("score", 0.0);
            r.tie = j.value("tie", false);
            r.truth_index = j.at("truth_index").get<int>();
            r.m = j.at("m").get<int>();
            r.failed = j.value("failed", false);
            log.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(e.what(), line_no);
        }
    }
    validate_log(log);
    return log;
}

double PropensityModel::probability(int truth_index, int m) const {
    switch (kind) {
        case Kind::uniform:
            if (m < 1 || truth_index < 1 || truth_index > m) return 0.0;
            return 1.0 / static_cast<double>(m);
    }
    return 0.0;
}

double PropensityModel::weight(int truth_index, int m) const {
    switch (kind) {
        case Kind::uniform:
            if (m < 1 || truth_index < 1 || truth_index > m) return 0.0;
            return static_cast<double>(m);
    }
    return 0.0;
}

double accuracy(const PredictionLog& log) {
    require_nonempty(log);
    CompensatedSum s;
    for (const auto& r : log) s += r.correct() ? 1.0 : 0.0;
    return s.value() / static_cast<double>(log.size());
}

double ips(const PredictionLog& log, const PropensityModel& propensity) {
    require_nonempty(log);
    CompensatedSum s;
    for (const auto& r : log) {
        const double w = propensity.weight(r.truth_index, r.m);
        if (!(w > 0.0)) throw ValidationError("zero propensity for " + r.example_key);
        if (r.correct()) s += w;
    }
    return s.value() / static_cast<double>(log.size());
}

std::map<int, LabelStats> breakdown_by_label(const PredictionLog& log) {
    std::map<int, LabelStats> out;
    std::map<int, CompensatedSum> chance;
    for (const auto& r : log) {
        auto& s = out[r.truth_index];
        ++s.count;
        if (r.correct()) ++s.correct;
        chance[r.truth_index] += 1.0 / static_cast<double>(r.m);
    }
    for (auto& [label, s] : out) {
        s.accuracy = static_cast<double>(s.correct) / static_cast<double>(s.count);
        s.chance_hits = chance[label].value();
    }
    return out;
}

std::map<int, SizeStats> breakdown_by_m(const PredictionLog& log, const PropensityModel& propensity) {
    std::map<int, PredictionLog> groups;
    for (const auto& r : log) groups[r.m].push_back(r);
    std::map<int, SizeStats> out;
    for (const auto& [m, rows] : groups) out[m] = SizeStats{rows.size(), accuracy(rows), ips(rows, propensity)};
    return out;
}

PositionBiasFinding detect_position_bias(const std::map<int, LabelStats>& per_label, double min_chance_hits) {
    PositionBiasFinding none;
    if (per_label.size() < 2) return none;
    std::vector<std::pair<int, LabelStats>> labels(per_label.begin(), per_label.end());
    // Suffix aggregates over labels strictly above each candidate cutoff.
    const std::size_t L = labels.size();
    std::vector<std::size_t> correct_above(L, 0), rows_above(L, 0);
    std::vector<double> chance_above(L, 0.0);
    for (std::size_t i = L - 1; i-- > 0;) {
        correct_above[i] = correct_above[i + 1] + labels[i + 1].second.correct;
        rows_above[i] = rows_above[i + 1] + labels[i + 1].second.count;
        chance_above[i] = chance_above[i + 1] + labels[i + 1].second.chance_hits;
    }
    std::size_t correct_upto = 0;
    for (std::size_t i = 0; i + 1 < L; ++i) {
        correct_upto += labels[i].second.correct;
        if (correct_upto > 0 && correct_above[i] == 0 && chance_above[i] >= min_chance_hits) {
            return PositionBiasFinding{true, labels[i].first, rows_above[i], chance_above[i]};
        }
    }
    return none;
}

std::string keys_digest(const PredictionLog& log) {
    std::vector<std::string> keys;
    keys.reserve(log.size());
    for (const auto& r : log) keys.push_back(r.example_key);
    std::sort(keys.begin(), keys.end());
    std::string joined;
    for (const auto& k : keys) {
        joined += k;
        joined += '\n';
    }
    return sha256_hex(joined);
}

EvalReport evaluate(const PredictionLog& log, const PropensityModel& propensity, std::string name) {
    validate_log(log);
    EvalReport r;
    r.name = std::move(name);
    r.n = log.size();
    r.failed = static_cast<std::size_t>(std::count_if(log.begin(), log.end(), [](const auto& x) { return x.failed; }));
    r.accuracy = accuracy(log);
    r.ips = ips(log, propensity);
    r.per_label = breakdown_by_label(log);
    r.per_m = breakdown_by_m(log, propensity);
    r.position_bias = detect_position_bias(r.per_label);
    r.keys_digest = keys_digest(log);
    return r;
}

void require_same_keys(const PredictionLog& candidate, const PredictionLog& baseline) {
    std::set<std::string> a, b;
    for (const auto& r : candidate) a.insert(r.example_key);
    for (const auto& r : baseline) b.insert(r.example_key);
    if (a == b && candidate.size() == baseline.size()) return;
    std::vector<std::string> only_a, only_b;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(only_a));
    std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(only_b));
    std::ostringstream msg;
    msg << "example keys differ: " << only_a.size() << " only in candidate, " << only_b.size() << " only in baseline";
    auto sample = [&](const char* label, const std::vector<std::string>& v) {
        if (v.empty()) return;
        msg << "; " << label << ":";
        for (std::size_t i = 0; i < std::min<std::size_t>(v.size(), 5); ++i) msg << ' ' << v[i];
        if (v.size() > 5) msg << " ...";
    };
    sample("candidate-only", only_a);
    sample("baseline-only", only_b);
    if (only_a.empty() && only_b.empty()) msg << " (duplicate keys: " << candidate.size() << " vs " << baseline.size() << " rows)";
    throw KeyMismatchError(msg.str(), only_a.size(), only_b.size());
}

std::pair<double, double> relative_improvement(const EvalReport& candidate, const EvalReport& baseline) {
    if (candidate.keys_digest != baseline.keys_digest || candidate.n != baseline.n)
        throw KeyMismatchError("reports cover different example keys (n " + std::to_string(candidate.n) + " vs " +
                                   std::to_string(baseline.n) + ")",
                               0, 0);
    if (baseline.accuracy == 0.0 || baseline.ips == 0.0) throw ValidationError("baseline metric is zero");
    return {100.0 * (candidate.accuracy - baseline.accuracy) / baseline.accuracy,
            100.0 * (candidate.ips - baseline.ips) / baseline.ips};
}

void attach_baseline(EvalReport& candidate, const EvalReport& baseline) {
    const auto [acc, ip] = relative_improvement(candidate, baseline);
    candidate.baseline_name = baseline.name;
    candidate.rel_accuracy_pct = acc;
    candidate.rel_ips_pct = ip;
}

RandomBaseline expected_random_baseline(std::span<const int> set_sizes) {
    if (set_sizes.empty()) throw ValidationError("no examples");
    CompensatedSum acc;
    for (int m : set_sizes) {
        if (m < 1) throw ValidationError("candidate set size must be positive");
        acc += 1.0 / static_cast<double>(m);
    }
    // Under uniform propensity every row's expected IPS term is (1/m) * m = 1.
    return {acc.value() / static_cast<double>(set_sizes.size()), 1.0};
}

RandomBaseline expected_random_baseline(const corpus::ExampleSet& examples) {
    std::vector<int> sizes;
    sizes.reserve(examples.size());
    for (const auto& ex : examples.examples) sizes.push_back(ex.m());
    return expected_random_baseline(sizes);
}

std::string to_json(const EvalReport& r) {
    ojson j;
    j["name"] = r.name;
    j["n"] = r.n;
    j["failed"] = r.failed;
    j["accuracy"] = r.accuracy;
    j["ips"] = r.ips;
    j["keys_digest"] = r.keys_digest;
    j["baseline_name"] = r.baseline_name ? ojson(*r.baseline_name) : ojson(nullptr);
    j["rel_accuracy_pct"] = r.rel_accuracy_pct ? ojson(*r.rel_accuracy_pct) : ojson(nullptr);
    j["rel_ips_pct"] = r.rel_ips_pct ? ojson(*r.rel_ips_pct) : ojson(nullptr);
    auto labels = ojson::array();
    for (const auto& [label, s] : r.per_label) {
        labels.push_back({{"label", label}, {"count", s.count}, {"correct", s.correct}, {"accuracy", s.accuracy},
                          {"chance_hits", s.chance_hits}});
    }
    j["per_label"] = std::move(labels);
    auto sizes = ojson::array();
    for (const auto& [m, s] : r.per_m) {
        sizes.push_back({{"m", m}, {"count", s.count}, {"accuracy", s.accuracy}, {"ips", s.ips}});
    }
    j["per_m"] = std::move(sizes);
    j["position_bias"] = {{"flagged", r.position_bias.flagged},
                          {"cutoff_label", r.position_bias.cutoff_label},
                          {"rows_above", r.position_bias.rows_above},
                          {"chance_hits_above", r.position_bias.chance_hits_above}};
    return j.dump(2);
}

EvalReport report_from_json(const std::string& text) {
    EvalReport r;
    try {
        const auto j = nlohmann::json::parse(text);
        r.name = j.at("name").get<std::string>();
        r.n = j.at("n").get<std::size_t>();
        r.failed = j.at("failed").get<std::size_t>();
        r.accuracy = j.at("accuracy").get<double>();
        r.ips = j.at("ips").get<double>();
        r.keys_digest = j.at("keys_digest").get<std::string>();
        if (!j.at("baseline_name").is_null()) r.baseline_name = j["baseline_name"].get<std::string>();
        if (!j.at("rel_accuracy_pct").is_null()) r.rel_accuracy_pct = j["rel_accuracy_pct"].get<double>();
        if (!j.at("rel_ips_pct").is_null()) r.rel_ips_pct = j["rel_ips_pct"].get<double>();
        for (const auto& e : j.at("per_label")) {
            r.per_label[e.at("label").get<int>()] =
                LabelStats{e.at("count").get<std::size_t>(), e.at("correct").get<std::size_t>(),
                           e.at("accuracy").get<double>(), e.at("chance_hits").get<double>()};
        }
        for (const auto& e : j.at("per_m")) {
            r.per_m[e.at("m").get<int>()] =
                SizeStats{e.at("count").get<std::size_t>(), e.at("accuracy").get<double>(), e.at("ips").get<double>()};
        }
        const auto& pb = j.at("position_bias");
        r.position_bias = PositionBiasFinding{pb.at("flagged").get<bool>(), pb.at("cutoff_label").get<int>(),
                                              pb.at("rows_above").get<std::size_t>(),
                                              pb.at("chance_hits_above").get<double>()};
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed report: ") + e.what());
    }
    return r;
}

std::string render_table(const EvalReport& r) {
    std::ostringstream out;
    char line[160];
    out << "report: " << (r.name.empty() ? "(unnamed)" : r.name) << "  n=" << r.n << "  failed=" << r.failed << '\n';
    std::snprintf(line, sizeof line, "accuracy %.4f   ips %.4f\n", r.accuracy, r.ips);
    out << line;
    if (r.baseline_name && r.rel_accuracy_pct && r.rel_ips_pct) {
        out << "vs " << *r.baseline_name << ": accuracy " << pct(*r.rel_accuracy_pct) << "   ips "
            << pct(*r.rel_ips_pct) << '\n';
    }
    out << "\naccuracy by ground-truth label\n  label   count  accuracy\n";
    for (const auto& [label, s] : r.per_label) {
        std::snprintf(line, sizeof line, "  %5d  %6zu  %8.4f\n", label, s.count, s.accuracy);
        out << line;
    }
    out << "\nby candidate-set size\n      m   count  accuracy       ips\n";
    for (const auto& [m, s] : r.per_m) {
        std::snprintf(line, sizeof line, "  %5d  %6zu  %8.4f  %8.4f\n", m, s.count, s.accuracy, s.ips);
        out << line;
    }
    out << '\n';
    if (r.position_bias.flagged) {
        std::snprintf(line, sizeof line,
                      "POSITION BIAS: 0 correct for labels > %d (%zu rows, %.1f hits expected by chance)\n",
                      r.position_bias.cutoff_label, r.position_bias.rows_above, r.position_bias.chance_hits_above);
        out << line;
    } else {
        out << "position bias: none detected\n";
    }
    return out.str();
}

std::string label_breakdown_csv(const EvalReport& r) {
    std::ostringstream out;
    out << "label,count,accuracy\n";
    for (const auto& [label, s] : r.per_label) out << label << ',' << s.count << ',' << fmt("%.6f", s.accuracy) << '\n';
    return out.str();
}

std::string render_comparison(const std::vector<ReportEntry>& entries, const std::string& baseline_method) {
    const auto base = std::find_if(entries.begin(), entries.end(),
                                   [&](const ReportEntry& e) { return e.method == baseline_method; });
    if (base == entries.end()) throw ValidationError("baseline '" + baseline_method + "' not among the reports");
    std::size_t width = 6;
    for (const auto& e : entries) width = std::max(width, e.method.size());

    std::ostringstream out;
    char line[256];
    out << "Relative change vs " << baseline_method << " (n=" << base->report.n << ")\n";
    std::snprintf(line, sizeof line, "%-*s  %10s  %10s  %9s  %9s\n", static_cast<int>(width), "Method", "Accuracy",
                  "IPS", "acc(abs)", "ips(abs)");
    out << line << std::string(width + 46, '-') << '\n';
    for (const auto& e : entries) {
        const auto [acc, ip] = relative_improvement(e.report, base->report);
        std::snprintf(line, sizeof line, "%-*s  %10s  %10s  %9.4f  %9.4f\n", static_cast<int>(width), e.method.c_str(),
                      pct(acc).c_str(), pct(ip).c_str(), e.report.accuracy, e.report.ips);
        out << line;
    }
    return out.str();
}

}  // namespace artrec::metrics
