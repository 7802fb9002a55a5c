#include "artrec/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "artrec/error.hpp"
#include "artrec/text.hpp"

namespace artrec::policy {
namespace {

// Scales chosen so every feature group has within-title spread of a few
// tenths; plain gradient descent is badly conditioned otherwise.
constexpr double kThemeScale = 50.0;
constexpr double kOverlapScale = 10.0;

double engagement_weight(corpus::Engagement e) {
    switch (e) {
        case corpus::Engagement::liked: return 1.0;
        case corpus::Engagement::watched: return 0.25;
        case corpus::Engagement::abandoned: return -1.0;
    }
    return 0.0;
}

int length_bucket(std::size_t tokens) {
    if (tokens < 185) return 0;
    if (tokens < 200) return 1;
    if (tokens < 215) return 2;
    return 3;
}

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

Eigen::VectorXd history_preferences(const corpus::UserProfile& user) {
    Eigen::VectorXd pref = Eigen::VectorXd::Zero(FeatureLayout::kThemes);
    for (const auto& it : user.interactions) {
        const double w = engagement_weight(it.engagement);
        for (const auto& g : it.genres) {
            for (const auto& tok : text::words(g)) {
                if (auto theme = lexicon::theme_of_token(tok)) pref[*theme] += w;
            }
        }
    }
    return pref / static_cast<double>(std::max<std::size_t>(user.interactions.size(), 1));
}

Eigen::MatrixXd option_features(const corpus::Example& ex) {
    using L = FeatureLayout;
    const auto& user = *ex.user;
    const Eigen::VectorXd pref = history_preferences(user);

    std::vector<std::string> history_tokens;
    for (const auto& it : user.interactions) {
        for (auto& t : text::words(it.title)) history_tokens.push_back(std::move(t));
        for (const auto& g : it.genres)
            for (auto& t : text::words(g)) history_tokens.push_back(std::move(t));
    }
    history_tokens = sorted_unique(std::move(history_tokens));

    const int m = ex.m();
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(m, L::dim());
    for (int j = 0; j < m; ++j) {
        const auto tokens = text::words(ex.title->options[static_cast<std::size_t>(j)].caption);
        Eigen::VectorXd share = Eigen::VectorXd::Zero(L::kThemes);
        for (const auto& t : tokens)
            if (auto theme = lexicon::theme_of_token(t)) share[*theme] += 1.0;
        if (!tokens.empty()) share /= static_cast<double>(tokens.size());
        phi.row(j).head(L::kThemes) = (kThemeScale * pref.cwiseProduct(share)).transpose();

        const auto caption_set = sorted_unique(tokens);
        std::vector<std::string> common;
        std::set_intersection(caption_set.begin(), caption_set.end(), history_tokens.begin(), history_tokens.end(),
                              std::back_inserter(common));
        phi(j, L::overlap_index()) = caption_set.empty() ? 0.0
                                                         : kOverlapScale * static_cast<double>(common.size()) /
                                                               static_cast<double>(caption_set.size());

        phi(j, L::length_offset() + length_bucket(tokens.size())) = 1.0;
        phi(j, L::position_offset() + std::min(j, L::kPositionSlots)) = 1.0;
    }
    if (!phi.allFinite()) throw ValidationError("non-finite features for " + ex.key());
    return phi;
}

}  // namespace artrec::policy
