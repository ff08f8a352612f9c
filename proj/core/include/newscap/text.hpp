#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Small string utilities shared by every module. Words are always
// whitespace-delimited tokens; that is the unit every budget is stated in.
namespace newscap::text {

bool is_space(char c) noexcept;

// Letters, digits and any non-ASCII byte count as word characters for
// boundary tests, so UTF-8 names are never split mid-codepoint.
bool is_word_char(char c) noexcept;

std::vector<std::string_view> split_words(std::string_view s);

std::size_t word_count(std::string_view s);

// Collapses runs of whitespace to one space and trims both ends.
std::string normalize_whitespace(std::string_view s);

std::string join(std::span<const std::string> parts, std::string_view sep);
std::string join(std::span<const std::string_view> parts, std::string_view sep);

// First `n` whitespace tokens re-joined with single spaces.
std::string first_words(std::string_view s, std::size_t n);

// True when `needle` occurs in `haystack` with no word character directly
// before or after the occurrence.
bool contains_at_word_boundary(std::string_view haystack,
                               std::string_view needle) noexcept;

std::string to_lower_ascii(std::string_view s);

}  // namespace newscap::text
