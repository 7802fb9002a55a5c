#include "artrec/run_config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "artrec/error.hpp"
#include "artrec/hashing.hpp"

namespace artrec::cli {
namespace {

using json = nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(where, "must be an object");
    for (const auto& [k, _] : obj.items())
        if (!allowed.contains(k)) throw ConfigError(where.empty() ? k : where + "." + k, "unknown key");
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + key, "wrong type");
    }
}

void apply_corpus(const json& j, corpus::CorpusConfig& c) {
    reject_unknown(j, "corpus",
                   {"n_users", "n_titles", "n_examples", "history_length", "latent_dim", "m_distribution",
                    "preference_noise"});
    read(j, "n_users", c.n_users, "corpus.");
    read(j, "n_titles", c.n_titles, "corpus.");
    read(j, "n_examples", c.n_examples, "corpus.");
    read(j, "history_length", c.history_length, "corpus.");
    read(j, "latent_dim", c.latent_dim, "corpus.");
    read(j, "preference_noise", c.preference_noise, "corpus.");
    if (j.contains("m_distribution")) {
        const auto& md = j["m_distribution"];
        if (!md.is_object()) throw ConfigError("corpus.m_distribution", "must map set size to weight");
        c.m_distribution.clear();
        for (const auto& [k, v] : md.items()) {
            int m = 0;
            try {
                std::size_t used = 0;
                m = std::stoi(k, &used);
                if (used != k.size()) throw std::invalid_argument(k);
            } catch (const std::exception&) {
                throw ConfigError("corpus.m_distribution", "keys must be integers, got '" + k + "'");
            }
            if (!v.is_number()) throw ConfigError("corpus.m_distribution", "weights must be numbers");
            c.m_distribution[m] = v.get<double>();
        }
    }
}

json to_json(const RunConfig& c) {
    json j;
    j["preset"] = c.preset;
    json md = json::object();
    for (const auto& [m, w] : c.corpus.m_distribution) md[std::to_string(m)] = w;
    j["corpus"] = {{"n_users", c.corpus.n_users},
                   {"n_titles", c.corpus.n_titles},
                   {"n_examples", c.corpus.n_examples},
                   {"history_length", c.corpus.history_length},
                   {"latent_dim", c.corpus.latent_dim},
                   {"m_distribution", md},
                   {"preference_noise", c.corpus.preference_noise}};
    j["fractions"] = c.fractions;
    j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
    j["backend"] = {{"url", c.backend.url},
                    {"auth_env", c.backend.auth_env},
                    {"model", c.backend.model},
                    {"timeout_ms", c.backend.timeout_ms},
                    {"retries", c.backend.retries},
                    {"replay", c.backend.replay},
                    {"offline", c.backend.offline},
                    {"parallelism", c.backend.parallelism},
                    {"max_new_tokens", c.backend.max_new_tokens},
                    {"temperature", c.backend.temperature},
                    {"teacher_temperature", c.backend.teacher_temperature}};
    j["train"] = {{"lr_grid", c.train.lr_grid},
                  {"beta", c.train.beta},
                  {"max_epochs", c.train.max_epochs},
                  {"patience", c.train.patience}};
    j["eval"] = {{"propensity", c.eval.propensity},
                 {"allow_partial", c.eval.allow_partial},
                 {"max_failed_fraction", c.eval.max_failed_fraction}};
    return j;
}

}  // namespace

RunConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("config", std::string("not valid JSON: ") + e.what());
    }
    reject_unknown(j, "", {"preset", "corpus", "fractions", "seed", "runs_dir", "backend", "train", "eval"});

    RunConfig c;
    read(j, "preset", c.preset, "");
    const auto p = corpus::preset(c.preset);
    c.corpus = p.config;
    c.fractions = p.fractions;

    if (j.contains("corpus")) apply_corpus(j["corpus"], c.corpus);
    read(j, "fractions", c.fractions, "");
    if (j.contains("seed") && !j["seed"].is_null()) {
        std::uint64_t s = 0;
        read(j, "seed", s, "");
        c.seed = s;
    }
    if (j.contains("runs_dir")) {
        std::string d;
        read(j, "runs_dir", d, "");
        c.runs_dir = d;
    }
    if (j.contains("backend")) {
        const auto& b = j["backend"];
        reject_unknown(b, "backend",
                       {"url", "auth_env", "model", "timeout_ms", "retries", "replay", "offline", "parallelism",
                        "max_new_tokens", "temperature", "teacher_temperature"});
        read(b, "url", c.backend.url, "backend.");
        read(b, "auth_env", c.backend.auth_env, "backend.");
        read(b, "model", c.backend.model, "backend.");
        read(b, "timeout_ms", c.backend.timeout_ms, "backend.");
        read(b, "retries", c.backend.retries, "backend.");
        read(b, "replay", c.backend.replay, "backend.");
        read(b, "offline", c.backend.offline, "backend.");
        read(b, "parallelism", c.backend.parallelism, "backend.");
        read(b, "max_new_tokens", c.backend.max_new_tokens, "backend.");
        read(b, "temperature", c.backend.temperature, "backend.");
        read(b, "teacher_temperature", c.backend.teacher_temperature, "backend.");
    }
    if (j.contains("train")) {
        const auto& t = j["train"];
        reject_unknown(t, "train", {"lr_grid", "beta", "max_epochs", "patience"});
        read(t, "lr_grid", c.train.lr_grid, "train.");
        read(t, "beta", c.train.beta, "train.");
        read(t, "max_epochs", c.train.max_epochs, "train.");
        read(t, "patience", c.train.patience, "train.");
    }
    if (j.contains("eval")) {
        const auto& e = j["eval"];
        reject_unknown(e, "eval", {"propensity", "allow_partial", "max_failed_fraction"});
        read(e, "propensity", c.eval.propensity, "eval.");
        read(e, "allow_partial", c.eval.allow_partial, "eval.");
        read(e, "max_failed_fraction", c.eval.max_failed_fraction, "eval.");
    }
    if (c.eval.propensity != "uniform") throw ConfigError("eval.propensity", "only 'uniform' is supported");
    c.corpus.validate();
    return c;
}

RunConfig load_config(const std::optional<std::filesystem::path>& file) {
    if (!file) return config_from_json("{}");
    std::ifstream in(*file, std::ios::binary);
    if (!in) throw ConfigError("config", "cannot read " + file->string());
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

std::string canonical_json(const RunConfig& config) { return to_json(config).dump(); }

std::string config_hash(const RunConfig& config) { return sha256_hex(canonical_json(config)); }

std::string dataset_hash(const RunConfig& config) {
    const auto j = to_json(config);
    const json identity = {{"corpus", j["corpus"]}, {"fractions", j["fractions"]}, {"seed", j["seed"]}};
    return sha256_hex(identity.dump());
}

std::uint64_t require_seed(const RunConfig& config) {
    if (!config.seed) throw ConfigError("seed", "required: pass --seed or set \"seed\" in the config file");
    return *config.seed;
}

std::filesystem::path run_dir(const RunConfig& config) {
    require_seed(config);
    return config.runs_dir / dataset_hash(config).substr(0, 16);
}

}  // namespace artrec::cli
