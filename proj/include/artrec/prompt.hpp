#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "artrec/corpus.hpp"

namespace artrec::prompt {

inline constexpr std::string_view kOptionOpen = "<option>";
inline constexpr std::string_view kOptionClose = "</option>";
inline constexpr std::string_view kPredictionLabel = "Prediction:";
inline constexpr std::string_view kReasonLabel = "Reason:";
/// Generation prefix that steers a model into the extractable answer shape.
inline constexpr std::string_view kGuidedPrefix = "Prediction: <option>";

struct ByteRange {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive
};

struct PromptRecord {
    const corpus::Example* example = nullptr;
    std::string prompt_text;
    std::vector<std::pair<int, ByteRange>> option_spans;  // caption bytes, option order
};

/// One clause per interaction, or "no prior interactions".
std::string render_history(const corpus::UserProfile& user);

/// Throws ValidationError if any rendered field contains an option delimiter.
PromptRecord render_prompt(const corpus::Example& ex);

struct ParsedOption {
    int option_id = 0;
    std::string caption;
    bool operator==(const ParsedOption&) const = default;
};

/// Captions between matched delimiter pairs, ids by order of appearance.
/// A single space just inside each delimiter is padding, not caption.
/// Throws ParseError on unbalanced delimiters or when no option is present.
std::vector<ParsedOption> parse_prompt(std::string_view text);

/// `Prediction: <option> {caption} </option>`
std::string prediction_text(std::string_view caption);

enum class RecordKind { sft, sft_reasoning, dpo };
std::string_view to_string(RecordKind k);

struct TrainingRecord {
    RecordKind kind = RecordKind::sft;
    std::string example_key;
    std::string prompt_text;
    std::string target;  // sft, sft_reasoning
    std::string chosen;  // dpo
    std::string rejected;
    std::optional<std::string> reasoning;
    int rejected_id = 0;  // dpo only

    /// {"prompt","completion"} or {"prompt","chosen","rejected"}.
    std::string to_json_line() const;
};

struct ExportStats {
    std::size_t emitted = 0;
    std::size_t missing_reasoning = 0;
    std::size_t rejected_reasoning = 0;  // reasoning contained a delimiter literal
    std::size_t skipped_single_option = 0;

    std::size_t skipped() const noexcept { return missing_reasoning + rejected_reasoning + skipped_single_option; }
};

struct Export {
    std::vector<TrainingRecord> records;
    ExportStats stats;
};

Export export_sft(const corpus::ExampleSet& set);

/// Reasonings keyed by Example::key(). Examples without one are counted,
/// not emitted.
Export export_sft_reasoning(const corpus::ExampleSet& set, const std::map<std::string, std::string>& reasonings);

/// Rejected option for a DPO pair: uniform over the non-truth candidates,
/// deterministic in (seed, example key). Requires m >= 2.
int dpo_rejected_option(const corpus::Example& ex, std::uint64_t seed);

/// Rejected option drawn uniformly from the non-truth candidates.
Export export_dpo(const corpus::ExampleSet& set, std::uint64_t seed);

/// Removes the leading `Reason: ... ` section of a reasoning target.
std::string strip_reason(std::string_view target);

/// Checks the `("Reason:" text)? "Prediction:" "<option>" caption "</option>"`
/// grammar and returns the embedded caption.
std::optional<std::string> target_caption(std::string_view target);

void write_jsonl(const std::vector<TrainingRecord>& records, std::ostream& out);
void write_jsonl(const std::vector<TrainingRecord>& records, const std::filesystem::path& path);

}  // namespace artrec::prompt
