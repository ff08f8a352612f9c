#include "newscap/text.hpp"

#include <cctype>

namespace newscap::text {

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_word_char(char c) noexcept {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::size_t word_count(std::string_view s) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : s) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

std::string normalize_whitespace(std::string_view s) {
  const auto words = split_words(s);
  return join(words, " ");
}

std::string join(std::span<const std::string> parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string join(std::span<const std::string_view> parts,
                 std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string first_words(std::string_view s, std::size_t n) {
  auto words = split_words(s);
  if (words.size() > n) words.resize(n);
  return join(words, " ");
}

bool contains_at_word_boundary(std::string_view haystack,
                               std::string_view needle) noexcept {
  if (needle.empty()) return false;
  std::size_t pos = haystack.find(needle);
  while (pos != std::string_view::npos) {
    const std::size_t end = pos + needle.size();
    // Only enforce a boundary where the needle itself starts/ends with a
    // word character; "U.S." must still match before a space.
    const bool left_ok = pos == 0 || !is_word_char(needle.front()) ||
                         !is_word_char(haystack[pos - 1]);
    const bool right_ok = end == haystack.size() ||
                          !is_word_char(needle.back()) ||
                          !is_word_char(haystack[end]);
    if (left_ok && right_ok) return true;
    pos = haystack.find(needle, pos + 1);
  }
  return false;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace newscap::text
