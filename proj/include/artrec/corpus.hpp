#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace artrec::corpus {

using Latent = std::vector<double>;

struct ArtworkOption {
    int option_id = 0;  // 1-based position in the candidate list
    std::string caption;
    Latent latent;  // hidden; never rendered or written to example files

    bool operator==(const ArtworkOption& o) const { return option_id == o.option_id && caption == o.caption; }
};

struct TitleCard {
    std::string title_id;
    std::string name;
    std::vector<std::string> genre_tags;
    std::vector<ArtworkOption> options;

    int m() const noexcept { return static_cast<int>(options.size()); }
    bool operator==(const TitleCard& o) const {
        return title_id == o.title_id && name == o.name && genre_tags == o.genre_tags && options == o.options;
    }
};

enum class Engagement { watched, liked, abandoned };

std::string_view to_string(Engagement e);
Engagement parse_engagement(std::string_view s);

struct Interaction {
    std::int64_t timestamp = 0;
    std::string title;
    std::vector<std::string> genres;
    Engagement engagement = Engagement::watched;

    bool operator==(const Interaction&) const = default;
};

struct UserProfile {
    std::string user_id;
    std::vector<Interaction> interactions;  // ascending by timestamp
    Latent latent;                          // hidden

    bool operator==(const UserProfile& o) const { return user_id == o.user_id && interactions == o.interactions; }
};

using UserPtr = std::shared_ptr<const UserProfile>;
using TitlePtr = std::shared_ptr<const TitleCard>;

/// One (user, title, candidates, ground truth) tuple. Every option other
/// than truth_index counts as a negative.
struct Example {
    UserPtr user;
    TitlePtr title;
    int truth_index = 0;  // 1-based

    /// Stable "user_id/title_id" identifier used across logs and exports.
    std::string key() const;
    const ArtworkOption& truth() const { return title->options.at(static_cast<std::size_t>(truth_index - 1)); }
    int m() const noexcept { return title->m(); }

    /// Persisted fields only; hidden latents are ignored.
    bool operator==(const Example& o) const {
        return truth_index == o.truth_index && *user == *o.user && *title == *o.title;
    }
};

enum class SplitLabel { train, val, test };
std::string_view to_string(SplitLabel s);

struct ExampleSet {
    std::vector<Example> examples;
    SplitLabel split_label = SplitLabel::train;

    std::size_t size() const noexcept { return examples.size(); }
    bool empty() const noexcept { return examples.empty(); }
};

struct CorpusConfig {
    int n_users = 3000;
    int n_titles = 600;
    int n_examples = 12000;
    int history_length = 20;  // K
    int latent_dim = 8;       // G, at most lexicon::kMaxThemes
    std::map<int, double> m_distribution = default_m_distribution();
    double preference_noise = 0.2545;  // Bayes-optimal accuracy ~0.8 on the default corpus
    std::uint64_t seed = 0;

    static std::map<int, double> default_m_distribution();

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
};

/// Named sizing: total examples plus the train/val/test fractions.
struct Preset {
    std::string name;
    CorpusConfig config;
    std::array<double, 3> fractions{};
};

/// "desk-scale" (10K/1K/1K) or "paper-scale" (110K/1K/5K).
Preset preset(const std::string& name);

// --- generation ---------------------------------------------------------

std::vector<TitleCard> synth_catalog(const CorpusConfig& config);
std::vector<UserProfile> synth_users(const CorpusConfig& config, const std::vector<TitleCard>& catalog);

struct SynthResult {
    ExampleSet set;
    std::size_t duplicates_skipped = 0;
};

/// Samples config.n_examples unique (user, title) pairs and a ground-truth
/// option for each from softmax(affinity / preference_noise); argmax with
/// lowest-id ties at zero noise.
SynthResult synth_examples(const std::vector<TitlePtr>& catalog, const std::vector<UserPtr>& users,
                           const CorpusConfig& config);

struct Corpus {
    std::vector<TitlePtr> catalog;
    std::vector<UserPtr> users;
    ExampleSet examples;
    std::size_t duplicates_skipped = 0;
};

Corpus generate(const CorpusConfig& config);

// --- oracle -------------------------------------------------------------

double dot(const Latent& a, const Latent& b);

/// Affinity of the example's user for each option, in option order.
/// Requires latents (generated corpora or an attached oracle sidecar).
std::vector<double> affinities(const Example& ex);

/// Argmax affinity with lowest-id tie-break: the Bayes-optimal choice.
int oracle_choice(const Example& ex);

/// Ground-truth distribution softmax(affinity / noise) over options.
std::vector<double> truth_distribution(const Example& ex, double preference_noise);

/// Expected accuracy of the argmax-affinity policy when the truth is drawn
/// with the given noise: mean over examples of the largest truth probability.
double bayes_optimal_accuracy(const ExampleSet& set, double preference_noise);

/// Bisection on noise so that bayes_optimal_accuracy hits `target`.
double calibrate_noise(const ExampleSet& set, double target, double tolerance = 1e-4);

/// Redraws truth_index for every example at the given noise, deterministic
/// in seed. Used after calibration.
void resample_truth(ExampleSet& set, double preference_noise, std::uint64_t seed);

// --- splitting ----------------------------------------------------------

struct Splits {
    ExampleSet train;
    ExampleSet val;
    ExampleSet test;
};

/// Sizes for n items by largest remainder; ties go to the earlier split.
std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& fractions);

/// Partitions by (user_id, title_id) tuple. Result membership depends only
/// on the input's tuple multiset and the seed, not on input order.
Splits split(const ExampleSet& examples, const std::array<double, 3>& fractions, std::uint64_t seed);

// --- persistence --------------------------------------------------------

/// Throws ValidationError on any invariant violation.
void validate_title(const TitleCard& title);
void validate_example(const Example& ex);

std::string example_to_json_line(const Example& ex);
Example example_from_json_line(const std::string& line, std::size_t line_no = 0);

void save_examples(const ExampleSet& set, const std::filesystem::path& path);
ExampleSet load_examples(const std::filesystem::path& path, SplitLabel label = SplitLabel::train);

/// Sidecar of hidden latents keyed by id.
struct Oracle {
    double preference_noise = 0.0;
    std::map<std::string, Latent> users;
    std::map<std::string, std::vector<Latent>> titles;  // per option, in option order
};

Oracle oracle_of(const ExampleSet& set, double preference_noise);
void save_oracle(const Oracle& oracle, const std::filesystem::path& path);
Oracle load_oracle(const std::filesystem::path& path);

/// Rebuilds examples with latents from the oracle. Missing ids throw.
ExampleSet attach_oracle(const ExampleSet& set, const Oracle& oracle);

}  // namespace artrec::corpus
