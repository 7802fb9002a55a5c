#include "artrec/inference.hpp"

#include <optional>

#include "artrec/error.hpp"
#include "artrec/extract.hpp"
#include "artrec/numeric.hpp"
#include "artrec/parallel.hpp"
#include "artrec/prompt.hpp"

namespace artrec::backend {

std::uint64_t example_seed(std::uint64_t seed, const std::string& key) { return mix_seed(seed, fnv1a(key)); }

metrics::PredictionLog run_inference(const Backend& backend, const corpus::ExampleSet& set,
                                     const InferenceOptions& options, InferenceFailures* failures) {
    GenerationRequest probe;
    probe.max_new_tokens = options.max_new_tokens;
    probe.temperature = options.temperature;
    validate(probe);

    const auto& examples = set.examples;
    metrics::PredictionLog log(examples.size());
    std::vector<std::optional<std::string>> errors(examples.size());

    parallel_for(examples.size(), options.parallelism, [&](std::size_t i) {
        const auto& ex = examples[i];
        auto& row = log[i];
        row.example_key = ex.key();
        row.truth_index = ex.truth_index;
        row.m = ex.m();
        try {
            GenerationRequest req;
            req.prompt_text = prompt::render_prompt(ex).prompt_text;
            req.max_new_tokens = options.max_new_tokens;
            req.temperature = options.temperature;
            req.example_key = row.example_key;
            const std::string text = req.prefix + backend.generate(req, example_seed(options.seed, row.example_key));
            std::vector<std::string> captions;
            captions.reserve(ex.title->options.size());
            for (const auto& o : ex.title->options) captions.push_back(o.caption);
            const auto hit = extract::extract_prediction(text, captions);
            row.predicted_id = hit.option_id;
            row.score = hit.score;
            row.tie = hit.tie;
        } catch (const std::exception& e) {
            row.failed = true;
            row.predicted_id = 0;
            errors[i] = e.what();
        }
    });

    if (failures) {
        *failures = {};
        for (const auto& e : errors) {
            if (!e) continue;
            if (failures->count++ == 0) failures->first_error = *e;
        }
    }
    return log;
}

void require_mostly_complete(const metrics::PredictionLog& log, double max_fraction) {
    std::size_t failed = 0;
    for (const auto& r : log) failed += r.failed ? 1 : 0;
    if (log.empty() || static_cast<double>(failed) <= max_fraction * static_cast<double>(log.size())) return;
    throw ValidationError(std::to_string(failed) + " of " + std::to_string(log.size()) +
                          " rows failed; rerun or pass --allow-partial");
}

}  // namespace artrec::backend
