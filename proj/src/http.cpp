#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "artrec/http.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "artrec/error.hpp"
#include "artrec/hashing.hpp"

namespace artrec::backend {
namespace {

constexpr std::size_t kExcerptBytes = 300;

std::string excerpt(const std::string& body) {
    return body.size() <= kExcerptBytes ? body : body.substr(0, kExcerptBytes) + "...";
}

}  // namespace

ReplayCache::ReplayCache(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

std::filesystem::path ReplayCache::path_for(const std::string& key) const {
    return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> ReplayCache::get(const std::string& key) const {
    std::lock_guard lock(mu_);
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return nlohmann::json::parse(buf.str()).at("response").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;  // torn or foreign file: treat as a miss
    }
}

void ReplayCache::put(const std::string& key, const std::string& request_body, const std::string& response_body) {
    nlohmann::ordered_json j;
    j["key"] = key;
    j["request"] = request_body;
    j["response"] = response_body;
    const auto target = path_for(key);
    std::lock_guard lock(mu_);
    std::filesystem::create_directories(target.parent_path());
    auto tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write replay cache entry " + tmp.string());
        out << j.dump() << '\n';
    }
    std::filesystem::rename(tmp, target);
}

std::chrono::milliseconds RetryPolicy::delay_for(int attempt) const {
    auto d = base_delay;
    for (int i = 1; i < attempt && d < max_delay; ++i) d *= 2;
    return std::min(d, max_delay);
}

bool is_transient_status(int status) {
    return status == 408 || status == 425 || status == 429 || (status >= 500 && status <= 599);
}

HttpCompletion::HttpCompletion(HttpConfig config) : config_(std::move(config)) {
    const auto scheme_end = config_.url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("backend.url", "expected scheme://host[:port]/path");
    const auto path_begin = config_.url.find('/', scheme_end + 3);
    scheme_host_port_ = config_.url.substr(0, path_begin);
    path_ = path_begin == std::string::npos ? "/" : config_.url.substr(path_begin);
    if (config_.retry.max_attempts < 1) throw ConfigError("backend.retries", "must be >= 1");
    if (config_.replay_dir) cache_ = std::make_unique<ReplayCache>(*config_.replay_dir);
    if (config_.offline && !cache_) throw ConfigError("backend.offline", "offline replay needs a replay directory");
}

std::string HttpCompletion::request_body(const GenerationRequest& request, std::uint64_t seed, const std::string& model) {
    nlohmann::ordered_json j;
    if (!model.empty()) j["model"] = model;
    j["prompt"] = request.prompt_text + request.prefix;
    j["max_tokens"] = request.max_new_tokens;
    j["temperature"] = request.temperature;
    j["stop"] = is_answer_request(request) ? nlohmann::ordered_json::array({std::string(prompt::kOptionClose)})
                                           : nlohmann::ordered_json::array();
    j["seed"] = seed;
    return j.dump();
}

std::string HttpCompletion::parse_response(const std::string& body) {
    try {
        const auto j = nlohmann::json::parse(body);
        if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
            const auto& c = j["choices"][0];
            if (c.contains("text") && c["text"].is_string()) return c["text"].get<std::string>();
            if (c.contains("message") && c["message"].contains("content")) return c["message"]["content"].get<std::string>();
        }
        if (j.contains("text") && j["text"].is_string()) return j["text"].get<std::string>();
        if (j.contains("completion") && j["completion"].is_string()) return j["completion"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("unparseable completion response: ") + e.what(), 200, excerpt(body));
    }
    throw BackendError("completion response has no text field", 200, excerpt(body));
}

std::string HttpCompletion::post(const std::string& body) const {
    httplib::Headers headers;
    if (!config_.auth_env.empty()) {
        if (const char* token = std::getenv(config_.auth_env.c_str()); token && *token) {
            headers.emplace("Authorization", std::string("Bearer ") + token);
        }
    }
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);

    int last_status = 0;
    std::string last_body;
    std::string last_error;
    for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
        if (attempt > 1) std::this_thread::sleep_for(config_.retry.delay_for(attempt - 1));
        // One client per call keeps generate() safe under concurrent use.
        httplib::Client client(scheme_host_port_);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());
        auto res = client.Post(path_, headers, body, "application/json");
        if (!res) {
            last_status = 0;
            last_error = httplib::to_string(res.error());
            last_body.clear();
            continue;
        }
        if (res->status >= 200 && res->status < 300) return res->body;
        last_status = res->status;
        last_body = res->body;
        last_error = "HTTP " + std::to_string(res->status);
        if (!is_transient_status(res->status)) break;
    }
    throw BackendError("completion request failed: " + last_error, last_status, excerpt(last_body));
}

std::string HttpCompletion::generate(const GenerationRequest& request, std::uint64_t seed) const {
    const std::string body = request_body(request, seed, config_.model);
    const std::string key = sha256_hex(body);
    if (cache_) {
        if (auto hit = cache_->get(key)) return parse_response(*hit);
        if (config_.offline) throw BackendError("replay cache miss for request " + key.substr(0, 12));
    }
    const std::string raw = post(body);
    std::string text = parse_response(raw);
    if (cache_) cache_->put(key, body, raw);
    return text;
}

}  // namespace artrec::backend
