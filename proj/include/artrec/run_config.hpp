#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "artrec/corpus.hpp"

namespace artrec::cli {

struct BackendSection {
    std::string url;       // http backend endpoint
    std::string auth_env;  // env var holding a bearer token
    std::string model;
    int timeout_ms = 60000;
    int retries = 3;
    bool replay = true;  // keep a replay cache under the run directory
    bool offline = false;
    int parallelism = 1;
    int max_new_tokens = 512;
    double temperature = 0.0;
    double teacher_temperature = 0.7;
};

struct TrainSection {
    std::vector<double> lr_grid;  // empty: the default grid
    double beta = 0.1;
    int max_epochs = 200;
    int patience = 20;
};

struct EvalSection {
    std::string propensity = "uniform";
    bool allow_partial = false;
    double max_failed_fraction = 0.01;
};

/// Everything a subcommand needs. Flags are applied on top of the file.
struct RunConfig {
    std::string preset = "desk-scale";
    corpus::CorpusConfig corpus;
    std::array<double, 3> fractions{};
    std::optional<std::uint64_t> seed;
    std::filesystem::path runs_dir = "runs";
    BackendSection backend;
    TrainSection train;
    EvalSection eval;
};

/// Preset defaults, then the JSON file's entries. Unknown keys are errors.
RunConfig load_config(const std::optional<std::filesystem::path>& file);
RunConfig config_from_json(const std::string& text);

/// Canonical JSON of the resolved config (sorted keys, fixed number format).
std::string canonical_json(const RunConfig& config);

/// SHA-256 of canonical_json; printed by every subcommand.
std::string config_hash(const RunConfig& config);

/// Hash of what determines the dataset: corpus config, split fractions, seed.
/// Names the run directory, so backend or trainer flags do not fork it.
std::string dataset_hash(const RunConfig& config);

/// runs_dir / first 16 hex chars of dataset_hash. Requires a seed.
std::filesystem::path run_dir(const RunConfig& config);

/// Throws ConfigError("seed", ...) when no seed was given.
std::uint64_t require_seed(const RunConfig& config);

}  // namespace artrec::cli
