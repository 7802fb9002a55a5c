#pragma once

#include <Eigen/Core>

#include "artrec/corpus.hpp"
#include "artrec/lexicon.hpp"

namespace artrec::policy {

/// Layout of the per-option feature vector:
///   [0, themes)                 history genre preference x caption theme share
///   themes                      token overlap between history text and caption
///   next kLengthBuckets         caption length bucket, one-hot
///   next kPositionSlots + 1     option position one-hot (last slot: beyond)
/// Position features let a trained policy pick up position bias.
struct FeatureLayout {
    static constexpr int kThemes = lexicon::kMaxThemes;
    static constexpr int kLengthBuckets = 4;
    static constexpr int kPositionSlots = 16;

    static constexpr int overlap_index() { return kThemes; }
    static constexpr int length_offset() { return kThemes + 1; }
    static constexpr int position_offset() { return length_offset() + kLengthBuckets; }
    static constexpr int dim() { return position_offset() + kPositionSlots + 1; }
};

/// m x F, one row per option in option order. Throws ValidationError if
/// any entry is non-finite.
Eigen::MatrixXd option_features(const corpus::Example& ex);

/// Engagement-weighted genre counts from the user's history, per theme,
/// divided by history length.
Eigen::VectorXd history_preferences(const corpus::UserProfile& user);

}  // namespace artrec::policy
