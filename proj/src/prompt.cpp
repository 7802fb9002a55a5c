#include "artrec/prompt.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <random>

#include "artrec/error.hpp"
#include "artrec/numeric.hpp"

namespace artrec::prompt {
namespace {

constexpr std::string_view kSystemFraming =
    "You are an expert in movies and shows. I want you to predict which of the available artworks "
    "the user would like the most based on their past watch history.";
constexpr std::string_view kHistoryLead = "The user's past interactions: ";
constexpr std::string_view kNoHistory = "no prior interactions";
constexpr std::string_view kOptionsLead = "Here are the artwork options:";
constexpr std::string_view kClosingInstruction = "Output the best artwork in text.";

bool has_delimiter(std::string_view s) {
    return s.find(kOptionOpen) != std::string_view::npos || s.find(kOptionClose) != std::string_view::npos;
}

void refuse_delimiters(std::string_view s, const char* field) {
    if (has_delimiter(s)) throw ValidationError("refusing to render text containing an option delimiter", 0, field);
}

std::string_view strip_padding(std::string_view inner) {
    if (!inner.empty() && inner.front() == ' ') inner.remove_prefix(1);
    if (!inner.empty() && inner.back() == ' ') inner.remove_suffix(1);
    return inner;
}

}  // namespace

std::string render_history(const corpus::UserProfile& user) {
    if (user.interactions.empty()) return std::string(kNoHistory);
    std::string out;
    for (std::size_t i = 0; i < user.interactions.size(); ++i) {
        const auto& it = user.interactions[i];
        if (i) out += "; ";
        out += "watched ";
        out += it.title;
        out += " (";
        for (std::size_t g = 0; g < it.genres.size(); ++g) {
            if (g) out += ", ";
            out += it.genres[g];
        }
        out += ") at ";
        out += std::to_string(it.timestamp);
        out += ", ";
        out += corpus::to_string(it.engagement);
    }
    return out;
}

PromptRecord render_prompt(const corpus::Example& ex) {
    const std::string history = render_history(*ex.user);
    refuse_delimiters(history, "history");
    refuse_delimiters(ex.title->name, "title_name");

    PromptRecord rec;
    rec.example = &ex;
    std::string& t = rec.prompt_text;
    t += kSystemFraming;
    t += '\n';
    t += kHistoryLead;
    t += history;
    t += ".\nThe user's new title is: ";
    t += ex.title->name;
    t += ".\n";
    t += kOptionsLead;
    t += '\n';
    for (const auto& opt : ex.title->options) {
        refuse_delimiters(opt.caption, "caption");
        t += kOptionOpen;
        t += ' ';
        const std::size_t begin = t.size();
        t += opt.caption;
        rec.option_spans.emplace_back(opt.option_id, ByteRange{begin, t.size()});
        t += ' ';
        t += kOptionClose;
        t += '\n';
    }
    t += kClosingInstruction;
    return rec;
}

std::vector<ParsedOption> parse_prompt(std::string_view text) {
    std::vector<ParsedOption> out;
    std::size_t pos = 0;
    std::size_t open_at = std::string_view::npos;  // pending "<option>"
    for (;;) {
        const std::size_t o = text.find(kOptionOpen, pos);
        const std::size_t c = text.find(kOptionClose, pos);
        if (o == std::string_view::npos && c == std::string_view::npos) break;
        if (o < c) {
            if (open_at != std::string_view::npos) throw ParseError("unbalanced delimiter", o);
            open_at = o;
            pos = o + kOptionOpen.size();
        } else {
            if (open_at == std::string_view::npos) throw ParseError("unbalanced delimiter", c);
            const std::size_t begin = open_at + kOptionOpen.size();
            out.push_back({static_cast<int>(out.size()) + 1, std::string(strip_padding(text.substr(begin, c - begin)))});
            open_at = std::string_view::npos;
            pos = c + kOptionClose.size();
        }
    }
    if (open_at != std::string_view::npos) throw ParseError("unbalanced delimiter", open_at);
    if (out.empty()) throw ParseError("no options found", 0);
    return out;
}

std::string prediction_text(std::string_view caption) {
    std::string out(kGuidedPrefix);
    out += ' ';
    out += caption;
    out += ' ';
    out += kOptionClose;
    return out;
}

std::string_view to_string(RecordKind k) {
    switch (k) {
        case RecordKind::sft: return "sft";
        case RecordKind::sft_reasoning: return "sft_reasoning";
        case RecordKind::dpo: return "dpo";
    }
    return "sft";
}

std::string TrainingRecord::to_json_line() const {
    nlohmann::ordered_json j;
    j["prompt"] = prompt_text;
    if (kind == RecordKind::dpo) {
        j["chosen"] = chosen;
        j["rejected"] = rejected;
    } else {
        j["completion"] = target;
    }
    return j.dump();
}

Export export_sft(const corpus::ExampleSet& set) {
    Export out;
    out.records.reserve(set.size());
    for (const auto& ex : set.examples) {
        corpus::validate_example(ex);
        TrainingRecord r;
        r.kind = RecordKind::sft;
        r.example_key = ex.key();
        r.prompt_text = render_prompt(ex).prompt_text;
        r.target = prediction_text(ex.truth().caption);
        out.records.push_back(std::move(r));
    }
    out.stats.emitted = out.records.size();
    return out;
}

Export export_sft_reasoning(const corpus::ExampleSet& set, const std::map<std::string, std::string>& reasonings) {
    Export out;
    for (const auto& ex : set.examples) {
        corpus::validate_example(ex);
        const auto it = reasonings.find(ex.key());
        if (it == reasonings.end()) {
            ++out.stats.missing_reasoning;
            continue;
        }
        if (has_delimiter(it->second)) {
            ++out.stats.rejected_reasoning;
            continue;
        }
        TrainingRecord r;
        r.kind = RecordKind::sft_reasoning;
        r.example_key = ex.key();
        r.prompt_text = render_prompt(ex).prompt_text;
        r.reasoning = it->second;
        r.target = std::string(kReasonLabel) + " " + it->second + " " + prediction_text(ex.truth().caption);
        out.records.push_back(std::move(r));
    }
    out.stats.emitted = out.records.size();
    return out;
}

int dpo_rejected_option(const corpus::Example& ex, std::uint64_t seed) {
    const int m = ex.m();
    if (m < 2) throw ValidationError("cannot form a preference pair with a single option", 0, "options");
    // Per-example stream: the pair for an example does not depend on set order.
    std::mt19937_64 rng(mix_seed(seed, fnv1a(ex.key())));
    std::uniform_int_distribution<int> pick(1, m - 1);
    int rejected = pick(rng);
    if (rejected >= ex.truth_index) ++rejected;
    return rejected;
}

Export export_dpo(const corpus::ExampleSet& set, std::uint64_t seed) {
    Export out;
    for (const auto& ex : set.examples) {
        const int m = ex.m();
        if (m < 2) {
            ++out.stats.skipped_single_option;
            continue;
        }
        corpus::validate_example(ex);
        const int rejected = dpo_rejected_option(ex, seed);

        TrainingRecord r;
        r.kind = RecordKind::dpo;
        r.example_key = ex.key();
        r.prompt_text = render_prompt(ex).prompt_text;
        r.chosen = prediction_text(ex.truth().caption);
        r.rejected = prediction_text(ex.title->options[static_cast<std::size_t>(rejected - 1)].caption);
        r.rejected_id = rejected;
        out.records.push_back(std::move(r));
    }
    out.stats.emitted = out.records.size();
    return out;
}

std::string strip_reason(std::string_view target) {
    if (!target.starts_with(kReasonLabel)) return std::string(target);
    const std::size_t p = target.rfind(kGuidedPrefix);
    if (p == std::string_view::npos) return std::string(target);
    return std::string(target.substr(p));
}

std::optional<std::string> target_caption(std::string_view target) {
    std::string plain = strip_reason(target);
    if (target.starts_with(kReasonLabel) && plain.size() == target.size()) return std::nullopt;
    std::string_view v(plain);
    const std::string head = std::string(kGuidedPrefix) + " ";
    const std::string tail = " " + std::string(kOptionClose);
    if (!v.starts_with(head) || !v.ends_with(tail) || v.size() < head.size() + tail.size()) return std::nullopt;
    std::string_view caption = v.substr(head.size(), v.size() - head.size() - tail.size());
    if (has_delimiter(caption)) return std::nullopt;
    return std::string(caption);
}

void write_jsonl(const std::vector<TrainingRecord>& records, std::ostream& out) {
    for (const auto& r : records) out << r.to_json_line() << '\n';
}

void write_jsonl(const std::vector<TrainingRecord>& records, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    write_jsonl(records, out);
    if (!out) throw Error("write failed: " + path.string());
}

}  // namespace artrec::prompt
