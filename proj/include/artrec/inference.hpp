#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "artrec/backend.hpp"
#include "artrec/corpus.hpp"
#include "artrec/metrics.hpp"

namespace artrec::backend {

struct InferenceOptions {
    std::uint64_t seed = 0;
    int parallelism = 1;
    int max_new_tokens = 512;
    double temperature = 0.0;
};

/// Per-example generation seed; independent of scheduling.
std::uint64_t example_seed(std::uint64_t seed, const std::string& key);

/// Failed rows from a run, with the first error message kept.
struct InferenceFailures {
    std::size_t count = 0;
    std::string first_error;
};

/// Guided-prefix generation + extraction for every example. Row order is
/// input order. Backend errors mark the row failed instead of aborting.
metrics::PredictionLog run_inference(const Backend& backend, const corpus::ExampleSet& set,
                                     const InferenceOptions& options, InferenceFailures* failures = nullptr);

/// Throws ValidationError when more than max_fraction of rows failed.
void require_mostly_complete(const metrics::PredictionLog& log, double max_fraction = 0.01);

}  // namespace artrec::backend
