#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "artrec/corpus.hpp"
#include "artrec/metrics.hpp"

namespace testutil {

using namespace artrec;

inline corpus::TitlePtr make_title(const std::string& id, const std::vector<std::string>& captions,
                                   std::vector<corpus::Latent> latents = {}) {
    auto t = std::make_shared<corpus::TitleCard>();
    t->title_id = id;
    t->name = "Title " + id;
    t->genre_tags = {"drama"};
    for (std::size_t i = 0; i < captions.size(); ++i) {
        corpus::ArtworkOption o;
        o.option_id = static_cast<int>(i) + 1;
        o.caption = captions[i];
        if (i < latents.size()) o.latent = latents[i];
        t->options.push_back(std::move(o));
    }
    return t;
}

inline corpus::UserPtr make_user(const std::string& id, corpus::Latent latent = {},
                                 std::vector<corpus::Interaction> history = {}) {
    auto u = std::make_shared<corpus::UserProfile>();
    u->user_id = id;
    u->latent = std::move(latent);
    u->interactions = std::move(history);
    return u;
}

inline corpus::Example make_example(corpus::UserPtr u, corpus::TitlePtr t, int truth) {
    return corpus::Example{std::move(u), std::move(t), truth};
}

/// Captions "cap<k> w1 w2 ..." of distinct vocabulary.
inline std::vector<std::string> simple_captions(int m, const std::string& stem = "opt") {
    std::vector<std::string> out;
    for (int i = 1; i <= m; ++i) {
        std::string c;
        for (int w = 0; w < 8; ++w) c += stem + std::to_string(i) + "w" + std::to_string(w) + " ";
        c.pop_back();
        out.push_back(c);
    }
    return out;
}

inline metrics::PredictionRow row(const std::string& key, int predicted, int truth, int m) {
    metrics::PredictionRow r;
    r.example_key = key;
    r.predicted_id = predicted;
    r.truth_index = truth;
    r.m = m;
    return r;
}

/// Small generated corpus shared by several test files.
inline corpus::CorpusConfig small_config(std::uint64_t seed = 7) {
    corpus::CorpusConfig c;
    c.n_users = 60;
    c.n_titles = 40;
    c.n_examples = 300;
    c.seed = seed;
    return c;
}

class TempDir {
public:
    TempDir() {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("artrec-test-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace testutil
