#include "artrec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <unordered_set>

#include "artrec/error.hpp"
#include "artrec/lexicon.hpp"
#include "artrec/numeric.hpp"
#include "artrec/text.hpp"

namespace artrec::corpus {
namespace {

using Rng = std::mt19937_64;

// Stream ids so catalog, users, and examples draw from independent generators.
constexpr std::uint64_t kCatalogStream = 1;
constexpr std::uint64_t kUserStream = 2;
constexpr std::uint64_t kExampleStream = 3;

constexpr int kCaptionMinTarget = 170;
constexpr int kCaptionMaxTarget = 230;
constexpr std::int64_t kHistoryEpoch = 1'600'000'000;
constexpr std::int64_t kHistoryWindow = 365LL * 24 * 3600;

// {T}: theme word, {N}: filler word, {G}: theme name used as a genre mention.
constexpr std::string_view kTemplates[] = {
    "The artwork shows a {T} {N} scene with {T} figures and {N} {T} details.",
    "In the foreground, {T} and {T} elements sit against a {N} backdrop.",
    "The palette is {N} and {N}, giving the image a {T} {T} tone.",
    "A {T} moment frames the title with {N} light over {T} shapes.",
    "Behind them, {T} imagery and a {N} horizon suggest a {G} story.",
    "The composition feels {T}, {N} and {T} at once.",
    "Its typography is {N} while the main figure looks {T} near the {T} edge.",
    "Viewers see {T} {T} cues beside {N} {N} texture in this poster.",
};

std::string format_id(char prefix, int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%05d", prefix, i);
    return buf;
}

template <typename T>
const T& pick(std::span<const T> items, Rng& rng) {
    std::uniform_int_distribution<std::size_t> d(0, items.size() - 1);
    return items[d(rng)];
}

int count_tokens(std::string_view s) {
    int n = 0;
    bool in_word = false;
    for (char c : s) {
        const bool space = c == ' ' || c == '\n' || c == '\t';
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

std::string compose_caption(const Latent& latent, Rng& rng) {
    std::vector<double> weights(latent.size());
    for (std::size_t g = 0; g < latent.size(); ++g) weights[g] = latent[g] * latent[g];
    std::discrete_distribution<int> theme(weights.begin(), weights.end());
    std::uniform_int_distribution<std::size_t> which_template(0, std::size(kTemplates) - 1);
    std::uniform_int_distribution<int> target_len(kCaptionMinTarget, kCaptionMaxTarget);

    const int target = target_len(rng);
    std::string caption;
    int tokens = 0;
    while (tokens < target) {
        std::string_view tpl = kTemplates[which_template(rng)];
        std::string sentence;
        for (std::size_t i = 0; i < tpl.size(); ++i) {
            if (tpl[i] == '{' && i + 2 < tpl.size() && tpl[i + 2] == '}') {
                switch (tpl[i + 1]) {
                    case 'T': sentence += pick(lexicon::theme_words(theme(rng)), rng); break;
                    case 'N': sentence += pick(lexicon::filler_words(), rng); break;
                    case 'G': sentence += lexicon::theme_name(theme(rng)); break;
                    default: sentence += tpl.substr(i, 3);
                }
                i += 2;
            } else {
                sentence.push_back(tpl[i]);
            }
        }
        if (!caption.empty()) caption.push_back(' ');
        caption += sentence;
        tokens += count_tokens(sentence);
    }
    return caption;
}

Latent option_latent(int primary, int secondary, int dim, Rng& rng) {
    std::uniform_real_distribution<double> jitter(0.0, 0.4);
    Latent a(static_cast<std::size_t>(dim));
    for (auto& x : a) x = jitter(rng);
    a[static_cast<std::size_t>(primary)] += 2.0;
    a[static_cast<std::size_t>(secondary)] += 1.0;
    return a;
}

Latent title_vector(const TitleCard& t) {
    Latent v(t.options.front().latent.size(), 0.0);
    for (const auto& o : t.options)
        for (std::size_t g = 0; g < v.size(); ++g) v[g] += o.latent[g];
    for (auto& x : v) x /= static_cast<double>(t.options.size());
    return v;
}

std::vector<double> softmax_scaled(const std::vector<double>& scores, double temperature) {
    const std::size_t m = scores.size();
    std::vector<double> p(m);
    if (std::isinf(temperature)) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(m));
        return p;
    }
    if (temperature == 0.0) {
        std::fill(p.begin(), p.end(), 0.0);
        p[static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin())] = 1.0;
        return p;
    }
    std::vector<double> z(m);
    for (std::size_t j = 0; j < m; ++j) z[j] = scores[j] / temperature;
    const double lse = log_sum_exp(z);
    for (std::size_t j = 0; j < m; ++j) p[j] = std::exp(z[j] - lse);
    return p;
}

int sample_truth(const std::vector<double>& scores, double noise, Rng& rng) {
    if (noise == 0.0) {
        // max_element returns the first maximum: lowest option id wins ties.
        return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin()) + 1;
    }
    const auto p = softmax_scaled(scores, noise);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double r = u(rng);
    for (std::size_t j = 0; j < p.size(); ++j) {
        r -= p[j];
        if (r < 0.0) return static_cast<int>(j) + 1;
    }
    return static_cast<int>(p.size());
}

}  // namespace

std::string_view to_string(Engagement e) {
    switch (e) {
        case Engagement::watched: return "watched";
        case Engagement::liked: return "liked";
        case Engagement::abandoned: return "abandoned";
    }
    return "watched";
}

Engagement parse_engagement(std::string_view s) {
    if (s == "watched") return Engagement::watched;
    if (s == "liked") return Engagement::liked;
    if (s == "abandoned") return Engagement::abandoned;
    throw ValidationError("unknown engagement '" + std::string(s) + "'", 0, "engagement");
}

std::string_view to_string(SplitLabel s) {
    switch (s) {
        case SplitLabel::train: return "train";
        case SplitLabel::val: return "val";
        case SplitLabel::test: return "test";
    }
    return "train";
}

std::string Example::key() const { return user->user_id + "/" + title->title_id; }

std::map<int, double> CorpusConfig::default_m_distribution() {
    return {{4, 0.22}, {5, 0.12}, {6, 0.12}, {8, 0.12}, {10, 0.10}, {12, 0.08}, {16, 0.06},
            {20, 0.05}, {24, 0.03}, {32, 0.02}, {40, 0.05}, {44, 0.02}, {48, 0.01}};
}

void CorpusConfig::validate() const {
    if (n_users <= 0) throw ConfigError("n_users", "must be positive");
    if (n_titles <= 0) throw ConfigError("n_titles", "must be positive");
    if (n_examples <= 0) throw ConfigError("n_examples", "must be positive");
    if (history_length <= 0) throw ConfigError("history_length", "must be positive");
    if (latent_dim < 2 || latent_dim > lexicon::kMaxThemes)
        throw ConfigError("latent_dim", "must be in [2, " + std::to_string(lexicon::kMaxThemes) + "]");
    if (m_distribution.empty()) throw ConfigError("m_distribution", "must not be empty");
    double mass = 0.0;
    for (const auto& [m, w] : m_distribution) {
        if (m < 2 || m > 64) throw ConfigError("m_distribution", "support must lie in [2, 64]");
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("m_distribution", "weights must be finite and >= 0");
        mass += w;
    }
    if (!(mass > 0.0)) throw ConfigError("m_distribution", "total mass must be positive");
    if (!(preference_noise >= 0.0)) throw ConfigError("preference_noise", "must be >= 0");
    if (static_cast<long long>(n_examples) > static_cast<long long>(n_users) * n_titles)
        throw ConfigError("n_examples", "exceeds the number of distinct (user, title) pairs");
}

Preset preset(const std::string& name) {
    Preset p;
    p.name = name;
    if (name == "desk-scale") {
        p.config.n_users = 3000;
        p.config.n_titles = 600;
        p.config.n_examples = 12000;
        p.fractions = {10.0 / 12.0, 1.0 / 12.0, 1.0 / 12.0};
    } else if (name == "paper-scale") {
        p.config.n_users = 20000;
        p.config.n_titles = 3000;
        p.config.n_examples = 116000;
        p.fractions = {110.0 / 116.0, 1.0 / 116.0, 5.0 / 116.0};
    } else {
        throw ConfigError("preset", "unknown preset '" + name + "'");
    }
    return p;
}

std::vector<TitleCard> synth_catalog(const CorpusConfig& config) {
    config.validate();
    Rng rng(mix_seed(config.seed, kCatalogStream));
    std::vector<int> sizes;
    std::vector<double> weights;
    for (const auto& [m, w] : config.m_distribution) {
        sizes.push_back(m);
        weights.push_back(w);
    }
    std::discrete_distribution<std::size_t> size_dist(weights.begin(), weights.end());
    std::uniform_int_distribution<int> theme(0, config.latent_dim - 1);
    std::bernoulli_distribution from_tags(0.7);

    std::vector<TitleCard> catalog;
    catalog.reserve(static_cast<std::size_t>(config.n_titles));
    for (int t = 0; t < config.n_titles; ++t) {
        TitleCard card;
        card.title_id = format_id('t', t);
        card.name = std::string(pick(lexicon::title_adjectives(), rng)) + " " +
                    std::string(pick(lexicon::title_nouns(), rng));
        const int g1 = theme(rng);
        int g2 = theme(rng);
        while (g2 == g1) g2 = theme(rng);
        card.genre_tags = {std::string(lexicon::theme_name(g1)), std::string(lexicon::theme_name(g2))};

        const int m = sizes[size_dist(rng)];
        std::set<std::string> seen;  // normalized captions
        for (int j = 1; j <= m; ++j) {
            for (;;) {
                const int primary = from_tags(rng) ? (std::bernoulli_distribution(0.5)(rng) ? g1 : g2) : theme(rng);
                int secondary = theme(rng);
                while (secondary == primary) secondary = theme(rng);
                ArtworkOption opt;
                opt.option_id = j;
                opt.latent = option_latent(primary, secondary, config.latent_dim, rng);
                opt.caption = compose_caption(opt.latent, rng);
                if (seen.insert(text::join(text::words(opt.caption))).second) {
                    card.options.push_back(std::move(opt));
                    break;
                }
            }
        }
        catalog.push_back(std::move(card));
    }
    return catalog;
}

std::vector<UserProfile> synth_users(const CorpusConfig& config, const std::vector<TitleCard>& catalog) {
    config.validate();
    if (catalog.empty()) throw ConfigError("catalog", "must not be empty");
    Rng rng(mix_seed(config.seed, kUserStream));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::normal_distribution<double> engagement_noise(0.0, 0.5);
    std::uniform_int_distribution<std::size_t> title_pick(0, catalog.size() - 1);
    std::uniform_int_distribution<std::int64_t> when(0, kHistoryWindow - 1);

    std::vector<Latent> title_vecs;
    title_vecs.reserve(catalog.size());
    for (const auto& t : catalog) {
        auto v = title_vector(t);
        const double norm = std::sqrt(dot(v, v));
        for (auto& x : v) x /= norm;
        title_vecs.push_back(std::move(v));
    }

    std::vector<UserProfile> users;
    users.reserve(static_cast<std::size_t>(config.n_users));
    for (int u = 0; u < config.n_users; ++u) {
        UserProfile profile;
        profile.user_id = format_id('u', u);
        profile.latent.resize(static_cast<std::size_t>(config.latent_dim));
        for (auto& x : profile.latent) x = gauss(rng);

        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(config.history_length), catalog.size());
        std::vector<std::int64_t> stamps(k);
        for (auto& s : stamps) s = kHistoryEpoch + when(rng);
        std::sort(stamps.begin(), stamps.end());

        std::unordered_set<std::size_t> used;
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t ti = title_pick(rng);
            while (!used.insert(ti).second) ti = title_pick(rng);
            const double s = dot(profile.latent, title_vecs[ti]) + engagement_noise(rng);
            Interaction it;
            it.timestamp = stamps[i];
            it.title = catalog[ti].name;
            it.genres = catalog[ti].genre_tags;
            it.engagement = s > 0.6 ? Engagement::liked : s < -0.6 ? Engagement::abandoned : Engagement::watched;
            profile.interactions.push_back(std::move(it));
        }
        users.push_back(std::move(profile));
    }
    return users;
}

SynthResult synth_examples(const std::vector<TitlePtr>& catalog, const std::vector<UserPtr>& users,
                           const CorpusConfig& config) {
    if (catalog.empty()) throw ConfigError("catalog", "must not be empty");
    if (users.empty()) throw ConfigError("users", "must not be empty");
    if (static_cast<long long>(config.n_examples) >
        static_cast<long long>(catalog.size()) * static_cast<long long>(users.size()))
        throw ConfigError("n_examples", "exceeds the number of distinct (user, title) pairs");
    if (!(config.preference_noise >= 0.0)) throw ConfigError("preference_noise", "must be >= 0");

    Rng rng(mix_seed(config.seed, kExampleStream));
    std::uniform_int_distribution<std::size_t> user_pick(0, users.size() - 1);
    std::uniform_int_distribution<std::size_t> title_pick(0, catalog.size() - 1);

    SynthResult result;
    std::unordered_set<std::uint64_t> taken;
    result.set.examples.reserve(static_cast<std::size_t>(config.n_examples));
    while (result.set.examples.size() < static_cast<std::size_t>(config.n_examples)) {
        const std::size_t ui = user_pick(rng);
        const std::size_t ti = title_pick(rng);
        if (!taken.insert(static_cast<std::uint64_t>(ui) * catalog.size() + ti).second) {
            ++result.duplicates_skipped;
            continue;
        }
        Example ex{users[ui], catalog[ti], 0};
        ex.truth_index = sample_truth(affinities(ex), config.preference_noise, rng);
        result.set.examples.push_back(std::move(ex));
    }
    return result;
}

Corpus generate(const CorpusConfig& config) {
    config.validate();
    Corpus c;
    auto titles = synth_catalog(config);
    auto users = synth_users(config, titles);
    for (auto& t : titles) c.catalog.push_back(std::make_shared<const TitleCard>(std::move(t)));
    for (auto& u : users) c.users.push_back(std::make_shared<const UserProfile>(std::move(u)));
    auto r = synth_examples(c.catalog, c.users, config);
    c.examples = std::move(r.set);
    c.duplicates_skipped = r.duplicates_skipped;
    return c;
}

double dot(const Latent& a, const Latent& b) {
    if (a.size() != b.size()) throw ValidationError("latent dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::vector<double> affinities(const Example& ex) {
    if (ex.user->latent.empty()) throw ValidationError("no oracle latents for user " + ex.user->user_id);
    std::vector<double> s;
    s.reserve(ex.title->options.size());
    for (const auto& o : ex.title->options) {
        if (o.latent.empty()) throw ValidationError("no oracle latents for title " + ex.title->title_id);
        s.push_back(dot(ex.user->latent, o.latent));
    }
    return s;
}

int oracle_choice(const Example& ex) {
    const auto s = affinities(ex);
    return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin()) + 1;
}

std::vector<double> truth_distribution(const Example& ex, double preference_noise) {
    return softmax_scaled(affinities(ex), preference_noise);
}

double bayes_optimal_accuracy(const ExampleSet& set, double preference_noise) {
    if (set.empty()) throw ValidationError("empty example set");
    CompensatedSum acc;
    for (const auto& ex : set.examples) {
        const auto p = truth_distribution(ex, preference_noise);
        acc += p[static_cast<std::size_t>(oracle_choice(ex) - 1)];
    }
    return acc.value() / static_cast<double>(set.size());
}

double calibrate_noise(const ExampleSet& set, double target, double tolerance) {
    double lo = std::log(1e-6);
    double hi = std::log(1e6);
    if (bayes_optimal_accuracy(set, std::exp(lo)) < target || bayes_optimal_accuracy(set, std::exp(hi)) > target)
        throw ConfigError("target", "Bayes-optimal accuracy target is not reachable on this set");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double acc = bayes_optimal_accuracy(set, std::exp(mid));
        if (std::fabs(acc - target) < tolerance) return std::exp(mid);
        // accuracy decreases with noise
        (acc > target ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

void resample_truth(ExampleSet& set, double preference_noise, std::uint64_t seed) {
    Rng rng(mix_seed(seed, kExampleStream));
    for (auto& ex : set.examples) ex.truth_index = sample_truth(affinities(ex), preference_noise, rng);
}

namespace {

void check_fractions(const std::array<double, 3>& fractions) {
    double total = 0.0;
    for (double f : fractions) {
        if (!(f >= 0.0)) throw ConfigError("fractions", "must be non-negative");
        total += f;
    }
    if (std::fabs(total - 1.0) > 1e-9) throw ConfigError("fractions", "must sum to 1");
}

}  // namespace

std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& fractions) {
    check_fractions(fractions);
    std::array<std::size_t, 3> sizes{};
    std::array<double, 3> rem{};
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        const double raw = static_cast<double>(n) * fractions[k];
        sizes[k] = static_cast<std::size_t>(std::floor(raw + 1e-9));
        rem[k] = raw - static_cast<double>(sizes[k]);
        assigned += sizes[k];
    }
    while (assigned < n) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < 3; ++k)
            if (rem[k] > rem[best]) best = k;
        ++sizes[best];
        rem[best] = -std::numeric_limits<double>::infinity();
        ++assigned;
    }
    return sizes;
}

Splits split(const ExampleSet& examples, const std::array<double, 3>& fractions, std::uint64_t seed) {
    check_fractions(fractions);
    std::size_t requested = 0;
    for (double f : fractions) requested += f > 0.0 ? 1 : 0;
    if (examples.size() < requested)
        throw ValidationError("fewer examples (" + std::to_string(examples.size()) + ") than splits requested (" +
                              std::to_string(requested) + ")");

    // Group by tuple so duplicates in ingested data cannot straddle splits.
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);
    auto tuple_of = [&](std::size_t i) {
        const auto& e = examples.examples[i];
        return std::tie(e.user->user_id, e.title->title_id);
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return tuple_of(a) < tuple_of(b); });
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i == 0 || tuple_of(order[i]) != tuple_of(order[i - 1])) groups.emplace_back();
        groups.back().push_back(order[i]);
    }
    Rng rng(seed);
    std::shuffle(groups.begin(), groups.end(), rng);

    const auto sizes = split_sizes(examples.size(), fractions);
    Splits out;
    out.train.split_label = SplitLabel::train;
    out.val.split_label = SplitLabel::val;
    out.test.split_label = SplitLabel::test;
    std::array<ExampleSet*, 3> targets = {&out.train, &out.val, &out.test};
    std::size_t k = 0;
    for (const auto& g : groups) {
        while (k < 2 && targets[k]->size() >= sizes[k]) ++k;
        for (std::size_t i : g) targets[k]->examples.push_back(examples.examples[i]);
    }
    return out;
}

}  // namespace artrec::corpus
