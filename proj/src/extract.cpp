#include "artrec/extract.hpp"

#include <algorithm>
#include <cstdint>
#include <map>

#include "artrec/prompt.hpp"
#include "artrec/text.hpp"

namespace artrec::extract {
namespace {

using Span = std::pair<std::uint32_t, std::uint32_t>;  // (offset, length)

// Tokens joined by single spaces; every n-gram is then a contiguous substring.
struct Joined {
    std::string text;
    std::vector<std::uint32_t> starts;  // token start offsets
};

Joined join_tokens(const std::vector<std::string>& tokens) {
    Joined j;
    j.starts.reserve(tokens.size());
    for (const auto& t : tokens) {
        if (!j.text.empty()) j.text.push_back(' ');
        j.starts.push_back(static_cast<std::uint32_t>(j.text.size()));
        j.text += t;
    }
    return j;
}

std::vector<Span> grams_of(const Joined& j, int n) {
    std::vector<Span> out;
    const std::size_t count = j.starts.size();
    if (n <= 0 || count < static_cast<std::size_t>(n)) return out;
    out.reserve(count - static_cast<std::size_t>(n) + 1);
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= count; ++i) {
        const std::size_t last = i + static_cast<std::size_t>(n) - 1;
        const std::size_t end = last + 1 < count ? j.starts[last + 1] - 1 : j.text.size();
        out.push_back({j.starts[i], static_cast<std::uint32_t>(end - j.starts[i])});
    }
    const std::string_view base(j.text);
    std::sort(out.begin(), out.end(), [&](Span a, Span b) { return base.substr(a.first, a.second) < base.substr(b.first, b.second); });
    return out;
}

// Multiset intersection size of two sorted gram lists.
std::size_t intersect(std::string_view a_text, const std::vector<Span>& a, std::string_view b_text,
                      const std::vector<Span>& b) {
    std::size_t i = 0, k = 0, hits = 0;
    while (i < a.size() && k < b.size()) {
        const auto x = a_text.substr(a[i].first, a[i].second);
        const auto y = b_text.substr(b[k].first, b[k].second);
        if (x < y) {
            ++i;
        } else if (y < x) {
            ++k;
        } else {
            ++hits;
            ++i;
            ++k;
        }
    }
    return hits;
}

int effective_n(std::size_t candidate_len, int n) {
    return static_cast<int>(std::min<std::size_t>(candidate_len, static_cast<std::size_t>(std::max(n, 1))));
}

}  // namespace

std::vector<std::string> normalize(std::string_view text) {
    std::string cleaned(text);
    for (std::string_view marker : {prompt::kOptionClose, prompt::kOptionOpen, prompt::kPredictionLabel}) {
        for (auto p = cleaned.find(marker); p != std::string::npos; p = cleaned.find(marker, p)) {
            cleaned.replace(p, marker.size(), " ");
        }
    }
    return text::words(cleaned);
}

std::string_view answer_region(std::string_view generation) {
    const auto p = generation.rfind(prompt::kPredictionLabel);
    if (p == std::string_view::npos) return generation;
    return generation.substr(p + prompt::kPredictionLabel.size());
}

double ngram_score(const std::vector<std::string>& candidate_tokens,
                   const std::vector<std::string>& generation_tokens, int n) {
    if (candidate_tokens.empty()) return 0.0;
    const int en = effective_n(candidate_tokens.size(), n);
    const Joined c = join_tokens(candidate_tokens);
    const Joined g = join_tokens(generation_tokens);
    const auto cg = grams_of(c, en);
    const auto gg = grams_of(g, en);
    return static_cast<double>(intersect(c.text, cg, g.text, gg)) / static_cast<double>(cg.size());
}

CandidateIndex::CandidateIndex(const std::vector<std::string>& captions, int n) {
    candidates_.reserve(captions.size());
    for (const auto& cap : captions) {
        const auto tokens = normalize(cap);
        Joined j = join_tokens(tokens);
        Candidate c;
        c.n = effective_n(tokens.size(), n);
        c.grams = grams_of(j, c.n);
        c.joined = std::move(j.text);
        candidates_.push_back(std::move(c));
    }
}

ExtractionResult CandidateIndex::match(std::string_view generation) const {
    const Joined g = join_tokens(normalize(answer_region(generation)));
    std::map<int, std::vector<Span>> gen_grams;  // by effective n

    ExtractionResult best;
    std::size_t best_hits = 0, best_total = 1;
    bool have_best = false;
    for (std::size_t idx = 0; idx < candidates_.size(); ++idx) {
        const auto& c = candidates_[idx];
        std::size_t hits = 0;
        const std::size_t total = c.grams.size();
        if (total > 0) {
            auto it = gen_grams.find(c.n);
            if (it == gen_grams.end()) it = gen_grams.emplace(c.n, grams_of(g, c.n)).first;
            hits = intersect(c.joined, c.grams, g.text, it->second);
        }
        const std::size_t denom = std::max<std::size_t>(total, 1);
        // Exact rational comparison: hits/denom vs best_hits/best_total.
        if (!have_best || hits * best_total > best_hits * denom) {
            have_best = true;
            best_hits = hits;
            best_total = denom;
            best.option_id = static_cast<int>(idx) + 1;
            best.score = static_cast<double>(hits) / static_cast<double>(denom);
            best.matched_ngrams = static_cast<int>(hits);
            best.tie = false;
        } else if (hits * best_total == best_hits * denom) {
            best.tie = true;
        }
    }
    if (best_hits == 0) {
        // Nothing matched: abstain as option 1, flagged.
        best = ExtractionResult{1, 0.0, true, 0};
    }
    return best;
}

ExtractionResult extract_prediction(std::string_view generation, const std::vector<std::string>& candidates, int n) {
    return CandidateIndex(candidates, n).match(generation);
}

}  // namespace artrec::extract
