#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace artrec::extract {

inline constexpr int kDefaultNgram = 3;

/// Drops option delimiters and the `Prediction:` label, then lowercases and
/// splits on punctuation/whitespace.
std::vector<std::string> normalize(std::string_view text);

/// Text after the last `Prediction:` label, or the whole text if absent.
std::string_view answer_region(std::string_view generation);

/// Fraction of the candidate's n-grams found in the generation, with
/// multiset intersection. Candidates shorter than n use their full length.
double ngram_score(const std::vector<std::string>& candidate_tokens,
                   const std::vector<std::string>& generation_tokens, int n = kDefaultNgram);

struct ExtractionResult {
    int option_id = 1;
    double score = 0.0;
    bool tie = false;
    int matched_ngrams = 0;
};

/// Candidates normalized once, then matched against any number of generations.
class CandidateIndex {
public:
    explicit CandidateIndex(const std::vector<std::string>& captions, int n = kDefaultNgram);

    /// Argmax score; ties and all-zero scores resolve to the lowest id with tie=true.
    ExtractionResult match(std::string_view generation) const;

    std::size_t size() const noexcept { return candidates_.size(); }

private:
    struct Candidate {
        std::string joined;                                        // tokens joined by single spaces
        std::vector<std::pair<std::uint32_t, std::uint32_t>> grams;  // (offset, length) into joined, sorted
        int n = 0;
    };
    std::vector<Candidate> candidates_;
};

/// Candidates are captions in option order (id = position + 1).
ExtractionResult extract_prediction(std::string_view generation, const std::vector<std::string>& candidates,
                                    int n = kDefaultNgram);

}  // namespace artrec::extract
