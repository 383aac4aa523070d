#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace genreloom::text {

std::string trim(std::string_view s);

/// Trims and collapses internal runs of spaces and tabs to one space.
/// Line breaks are left alone except at the ends.
std::string normalize_whitespace(std::string_view s);

/// Lower-cased alphanumeric tokens (ASCII letters/digits plus any non-ASCII
/// byte sequence, so accented words stay whole).
std::set<std::string> token_set(std::string_view s);

/// |A n B| / |A u B|; two empty sets count as identical (1.0).
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// Splits prose into sentences on '.', '!' or '?' followed by whitespace or
/// end of input. Closing quotes and brackets stay with their sentence.
std::vector<std::string> sentences(std::string_view s);

std::size_t word_count(std::string_view s);

bool starts_with_ci(std::string_view s, std::string_view prefix);
std::string to_lower(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

}  // namespace genreloom::text
