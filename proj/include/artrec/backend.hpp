#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>

#include "artrec/corpus.hpp"
#include "artrec/policy.hpp"
#include "artrec/prompt.hpp"

namespace artrec::backend {

struct GenerationRequest {
    std::string prompt_text;
    std::string prefix = std::string(prompt::kGuidedPrefix);
    int max_new_tokens = 512;
    double temperature = 0.0;
    /// Routing metadata for simulated backends; never sent over the wire.
    std::string example_key;
};

/// Throws ConfigError on max_new_tokens < 1 or a negative/NaN temperature.
void validate(const GenerationRequest& request);

/// A text generator. Returns the continuation after request.prefix.
/// Implementations must be safe to call concurrently.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string generate(const GenerationRequest& request, std::uint64_t seed) const = 0;
    virtual std::string name() const = 0;
};

/// Validates the request, then delegates.
std::string generate(const Backend& backend, const GenerationRequest& request, std::uint64_t seed);

/// Examples addressable by Example::key(). Holds shared ownership of the
/// underlying users and titles.
class ExampleLookup {
public:
    ExampleLookup() = default;
    explicit ExampleLookup(const corpus::ExampleSet& set);
    void add(const corpus::ExampleSet& set);

    /// Throws BackendError for unknown keys.
    const corpus::Example& at(const std::string& key) const;
    bool contains(const std::string& key) const { return by_key_.contains(key); }

private:
    std::unordered_map<std::string, corpus::Example> by_key_;
};

/// True when the request asks for a guided answer (its prefix opens an option).
bool is_answer_request(const GenerationRequest& request);

/// Short justification built from the user's liked genres; used by the
/// simulated teachers when asked to explain.
std::string canned_justification(const corpus::Example& ex);

/// Answers with the ground-truth caption; with probability error_rate it
/// picks a uniformly random other option instead.
class MockOracle final : public Backend {
public:
    MockOracle(std::shared_ptr<const ExampleLookup> lookup, double error_rate = 0.0);
    std::string generate(const GenerationRequest& request, std::uint64_t seed) const override;
    std::string name() const override;

private:
    std::shared_ptr<const ExampleLookup> lookup_;
    double error_rate_;
};

/// Always answers with the first listed option.
class MockFixed final : public Backend {
public:
    std::string generate(const GenerationRequest& request, std::uint64_t seed) const override;
    std::string name() const override { return "fixed"; }
};

/// Ground-truth caption with each token dropped independently at `dropout`.
class MockNoisy final : public Backend {
public:
    MockNoisy(std::shared_ptr<const ExampleLookup> lookup, double dropout);
    std::string generate(const GenerationRequest& request, std::uint64_t seed) const override;
    std::string name() const override;

private:
    std::shared_ptr<const ExampleLookup> lookup_;
    double dropout_;
};

/// Uniformly random listed option.
class MockRandom final : public Backend {
public:
    std::string generate(const GenerationRequest& request, std::uint64_t seed) const override;
    std::string name() const override { return "random"; }
};

/// Argmax (temperature 0) or softmax sample of a log-linear option policy.
class PolicyBackend final : public Backend {
public:
    PolicyBackend(std::shared_ptr<const ExampleLookup> lookup, policy::PolicyParams params, std::string label);
    std::string generate(const GenerationRequest& request, std::uint64_t seed) const override;
    std::string name() const override { return label_; }

private:
    std::shared_ptr<const ExampleLookup> lookup_;
    policy::PolicyParams params_;
    std::string label_;
};

/// The answer continuation for a caption: " {caption} </option>".
std::string answer_continuation(std::string_view caption);

}  // namespace artrec::backend
