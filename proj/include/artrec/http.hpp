#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "artrec/backend.hpp"

namespace artrec::backend {

/// Content-addressed store of raw responses keyed by request hash, so runs
/// can be replayed offline.
class ReplayCache {
public:
    explicit ReplayCache(std::filesystem::path dir);

    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& request_body, const std::string& response_body);
    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    std::filesystem::path path_for(const std::string& key) const;

    std::filesystem::path dir_;
    mutable std::mutex mu_;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_delay{200};
    std::chrono::milliseconds max_delay{2000};

    /// Delay before retry number `attempt` (1-based): base * 2^(attempt-1), capped.
    std::chrono::milliseconds delay_for(int attempt) const;
};

/// 408, 425, 429 and 5xx are worth retrying; other failures are not.
bool is_transient_status(int status);

struct HttpConfig {
    std::string url;                  // e.g. http://localhost:8000/v1/completions
    std::string auth_env;             // name of the env var holding a bearer token; empty for none
    std::string model;                // forwarded as "model" when set
    std::chrono::milliseconds timeout{60000};
    RetryPolicy retry;
    std::optional<std::filesystem::path> replay_dir;
    bool offline = false;  // replay only; cache misses are errors
};

/// Completion-style endpoint client. Body:
/// {"prompt": prompt+prefix, "max_tokens", "temperature", "stop", "seed"}.
/// The stop list is ["</option>"] for guided answers and empty otherwise.
class HttpCompletion final : public Backend {
public:
    explicit HttpCompletion(HttpConfig config);
    std::string generate(const GenerationRequest& request, std::uint64_t seed) const override;
    std::string name() const override { return "http"; }

    /// Request body exactly as sent; its SHA-256 is the replay key.
    static std::string request_body(const GenerationRequest& request, std::uint64_t seed, const std::string& model);

    /// Completion text from an OpenAI-style or plain {"text": ...} response.
    static std::string parse_response(const std::string& body);

private:
    std::string post(const std::string& body) const;

    HttpConfig config_;
    std::string scheme_host_port_;
    std::string path_;
    std::unique_ptr<ReplayCache> cache_;
};

}  // namespace artrec::backend
