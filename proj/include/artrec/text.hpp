#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace artrec::text {

/// Lowercases ASCII letters and splits on every ASCII character that is not
/// a letter or digit. Non-ASCII bytes stay inside tokens, so UTF-8 words
/// survive intact.
std::vector<std::string> words(std::string_view s);

std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

/// Count of non-overlapping occurrences of needle in haystack.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

}  // namespace artrec::text
