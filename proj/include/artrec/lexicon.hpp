#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace artrec::lexicon {

/// Largest supported latent dimension; one theme per latent axis.
inline constexpr int kMaxThemes = 12;

/// Theme name for latent axis g. Theme names double as genre tags.
std::string_view theme_name(int g);

/// Descriptive words that signal theme g in captions. Lowercase, single
/// tokens, disjoint across themes and from the filler vocabulary.
std::span<const std::string_view> theme_words(int g);

/// Theme whose name or vocabulary contains the (already normalized) token.
std::optional<int> theme_of_token(std::string_view token);

std::span<const std::string_view> filler_words();
std::span<const std::string_view> title_adjectives();
std::span<const std::string_view> title_nouns();

}  // namespace artrec::lexicon
