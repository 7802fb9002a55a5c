#include "artrec/distill.hpp"

#include <optional>
#include <vector>

#include "artrec/inference.hpp"
#include "artrec/numeric.hpp"
#include "artrec/parallel.hpp"
#include "artrec/prompt.hpp"

namespace artrec::backend {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> captions_of(const corpus::Example& ex) {
    std::vector<std::string> out;
    out.reserve(ex.title->options.size());
    for (const auto& o : ex.title->options) out.push_back(o.caption);
    return out;
}

struct Outcome {
    std::optional<std::string> reasoning;
    bool error = false;
};

}  // namespace

std::string explanation_prompt(const corpus::Example& ex) {
    std::string p = prompt::render_prompt(ex).prompt_text;
    p += "\nThe correct artwork is: ";
    p += prompt::kOptionOpen;
    p += ' ';
    p += ex.truth().caption;
    p += ' ';
    p += prompt::kOptionClose;
    p += ". Explain in 3-5 sentences why this artwork best matches this user's tastes.";
    return p;
}

std::string justified_prediction_prompt(const corpus::Example& ex, const std::string& reasoning) {
    std::string p = prompt::render_prompt(ex).prompt_text;
    p += '\n';
    p += prompt::kReasonLabel;
    p += ' ';
    p += reasoning;
    p += '\n';
    return p;
}

extract::ExtractionResult replay_prediction(const Backend& teacher, const corpus::Example& ex,
                                            const std::string& reasoning, const DistillOptions& options) {
    GenerationRequest req;
    req.prompt_text = justified_prediction_prompt(ex, reasoning);
    req.max_new_tokens = options.max_new_tokens;
    req.temperature = options.temperature;
    req.example_key = ex.key();
    const std::string text = req.prefix + generate(teacher, req, mix_seed(example_seed(options.seed, ex.key()), 2));
    return extract::extract_prediction(text, captions_of(ex));
}

Distillation distill_reasoning(const corpus::ExampleSet& set, const Backend& teacher, const DistillOptions& options) {
    const auto& examples = set.examples;
    std::vector<Outcome> outcomes(examples.size());

    parallel_for(examples.size(), options.parallelism, [&](std::size_t i) {
        const auto& ex = examples[i];
        try {
            GenerationRequest req;
            req.prompt_text = explanation_prompt(ex);
            req.prefix.clear();
            req.max_new_tokens = options.max_new_tokens;
            req.temperature = options.temperature;
            req.example_key = ex.key();
            std::string reasoning = trim(generate(teacher, req, mix_seed(example_seed(options.seed, ex.key()), 1)));
            if (reasoning.empty()) return;
            const auto hit = replay_prediction(teacher, ex, reasoning, options);
            if (hit.option_id == ex.truth_index && hit.score > 0.0) outcomes[i].reasoning = std::move(reasoning);
        } catch (const std::exception&) {
            outcomes[i].error = true;
        }
    });

    Distillation out;
    auto& st = out.stats;
    st.requested = examples.size();
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (outcomes[i].reasoning) {
            out.reasonings.emplace(examples[i].key(), std::move(*outcomes[i].reasoning));
            ++st.accepted;
        } else {
            ++st.filtered;
            if (outcomes[i].error) ++st.errors;
        }
    }
    st.filter_rate = st.requested ? static_cast<double>(st.filtered) / static_cast<double>(st.requested) : 0.0;
    return out;
}

}  // namespace artrec::backend
