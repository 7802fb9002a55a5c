#include "artrec/backend.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "artrec/error.hpp"
#include "artrec/features.hpp"
#include "artrec/lexicon.hpp"
#include "artrec/numeric.hpp"

namespace artrec::backend {
namespace {

std::mt19937_64 request_rng(const GenerationRequest& r, std::uint64_t seed) {
    std::uint64_t h = fnv1a(r.prompt_text);
    h = mix_seed(h, fnv1a(r.prefix));
    return std::mt19937_64(mix_seed(seed, h));
}

constexpr std::string_view kGenericJustification =
    "This artwork reflects the kinds of stories the user has engaged with recently, "
    "so it is the most appealing choice for this title.";

}  // namespace

void validate(const GenerationRequest& request) {
    if (request.max_new_tokens < 1) throw ConfigError("max_new_tokens", "must be >= 1");
    if (!(request.temperature >= 0.0)) throw ConfigError("temperature", "must be >= 0");
}

std::string generate(const Backend& backend, const GenerationRequest& request, std::uint64_t seed) {
    validate(request);
    return backend.generate(request, seed);
}

ExampleLookup::ExampleLookup(const corpus::ExampleSet& set) { add(set); }

void ExampleLookup::add(const corpus::ExampleSet& set) {
    for (const auto& ex : set.examples) by_key_.insert_or_assign(ex.key(), ex);
}

const corpus::Example& ExampleLookup::at(const std::string& key) const {
    auto it = by_key_.find(key);
    if (it == by_key_.end()) throw BackendError("unknown example key '" + key + "'");
    return it->second;
}

bool is_answer_request(const GenerationRequest& request) {
    return request.prefix.find(prompt::kOptionOpen) != std::string::npos;
}

std::string answer_continuation(std::string_view caption) {
    std::string out = " ";
    out += caption;
    out += ' ';
    out += prompt::kOptionClose;
    return out;
}

std::string canned_justification(const corpus::Example& ex) {
    const Eigen::VectorXd pref = policy::history_preferences(*ex.user);
    Eigen::Index top = 0;
    pref.maxCoeff(&top);
    std::ostringstream out;
    out << "The user's recent history leans toward " << lexicon::theme_name(static_cast<int>(top))
        << " titles they finished and liked. " << "For " << ex.title->name
        << ", this artwork puts the matching mood up front. "
        << "It is the option most likely to catch this user's eye.";
    return out.str();
}

MockOracle::MockOracle(std::shared_ptr<const ExampleLookup> lookup, double error_rate)
    : lookup_(std::move(lookup)), error_rate_(error_rate) {
    if (!(error_rate >= 0.0 && error_rate <= 1.0)) throw ConfigError("error_rate", "must be in [0, 1]");
}

std::string MockOracle::name() const {
    std::ostringstream out;
    out << "oracle";
    if (error_rate_ > 0.0) out << ":" << error_rate_;
    return out.str();
}

std::string MockOracle::generate(const GenerationRequest& request, std::uint64_t seed) const {
    const auto& ex = lookup_->at(request.example_key);
    if (!is_answer_request(request)) return " " + canned_justification(ex);
    auto rng = request_rng(request, seed);
    int pick = ex.truth_index;
    if (error_rate_ > 0.0 && std::bernoulli_distribution(error_rate_)(rng)) {
        pick = std::uniform_int_distribution<int>(1, ex.m() - 1)(rng);
        if (pick >= ex.truth_index) ++pick;
    }
    return answer_continuation(ex.title->options[static_cast<std::size_t>(pick - 1)].caption);
}

std::string MockFixed::generate(const GenerationRequest& request, std::uint64_t) const {
    if (!is_answer_request(request)) return " " + std::string(kGenericJustification);
    return answer_continuation(prompt::parse_prompt(request.prompt_text).front().caption);
}

MockNoisy::MockNoisy(std::shared_ptr<const ExampleLookup> lookup, double dropout)
    : lookup_(std::move(lookup)), dropout_(dropout) {
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout", "must be in [0, 1)");
}

std::string MockNoisy::name() const {
    std::ostringstream out;
    out << "noisy:" << dropout_;
    return out.str();
}

std::string MockNoisy::generate(const GenerationRequest& request, std::uint64_t seed) const {
    const auto& ex = lookup_->at(request.example_key);
    if (!is_answer_request(request)) return " " + canned_justification(ex);
    auto rng = request_rng(request, seed);
    std::bernoulli_distribution drop(dropout_);
    std::istringstream words(ex.truth().caption);
    std::string kept, w;
    while (words >> w) {
        if (drop(rng)) continue;
        if (!kept.empty()) kept.push_back(' ');
        kept += w;
    }
    return answer_continuation(kept);
}

std::string MockRandom::generate(const GenerationRequest& request, std::uint64_t seed) const {
    if (!is_answer_request(request)) return " " + std::string(kGenericJustification);
    const auto options = prompt::parse_prompt(request.prompt_text);
    auto rng = request_rng(request, seed);
    const auto pick = std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng);
    return answer_continuation(options[pick].caption);
}

PolicyBackend::PolicyBackend(std::shared_ptr<const ExampleLookup> lookup, policy::PolicyParams params,
                             std::string label)
    : lookup_(std::move(lookup)), params_(std::move(params)), label_(std::move(label)) {
    if (params_.weights.size() != policy::FeatureLayout::dim())
        throw ConfigError("policy", "weight vector has the wrong dimension");
}

std::string PolicyBackend::generate(const GenerationRequest& request, std::uint64_t seed) const {
    const auto& ex = lookup_->at(request.example_key);
    if (!is_answer_request(request)) return " " + canned_justification(ex);
    const Eigen::MatrixXd phi = policy::option_features(ex);
    int pick = 0;
    if (request.temperature == 0.0) {
        pick = policy::predict(params_.weights, phi);
    } else {
        const Eigen::VectorXd p = policy::policy_logprobs(params_.weights / request.temperature, phi).array().exp();
        auto rng = request_rng(request, seed);
        pick = std::discrete_distribution<int>(p.data(), p.data() + p.size())(rng) + 1;
    }
    return answer_continuation(ex.title->options[static_cast<std::size_t>(pick - 1)].caption);
}

}  // namespace artrec::backend
