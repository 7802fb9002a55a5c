#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "artrec/backend.hpp"
#include "artrec/corpus.hpp"
#include "artrec/extract.hpp"

namespace artrec::backend {

struct DistillationStats {
    std::size_t requested = 0;
    std::size_t accepted = 0;
    std::size_t filtered = 0;  // includes errors
    std::size_t errors = 0;
    double filter_rate = 0.0;
};

struct DistillOptions {
    std::uint64_t seed = 0;
    int parallelism = 1;
    double temperature = 0.7;
    int max_new_tokens = 512;
};

struct Distillation {
    std::map<std::string, std::string> reasonings;  // by Example::key()
    DistillationStats stats;
};

/// Reveal-the-answer prompt asking the teacher to justify the truth option.
std::string explanation_prompt(const corpus::Example& ex);

/// Original prompt plus the justification; answered with the guided prefix.
std::string justified_prediction_prompt(const corpus::Example& ex, const std::string& reasoning);

/// Predicts once with a justification in context (step two of distillation).
extract::ExtractionResult replay_prediction(const Backend& teacher, const corpus::Example& ex,
                                            const std::string& reasoning, const DistillOptions& options);

/// Single-shot: explain, re-predict, keep the explanation only when the
/// re-prediction extracts to the truth.
Distillation distill_reasoning(const corpus::ExampleSet& set, const Backend& teacher, const DistillOptions& options);

}  // namespace artrec::backend
