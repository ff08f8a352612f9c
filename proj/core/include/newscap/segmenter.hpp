#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace newscap {

struct Sentence {
  std::size_t index = 0;
  // Whitespace-normalized sentence text.
  std::string text;
  // Half-open word range [start_word, end_word) into the article.
  std::size_t start_word = 0;
  std::size_t end_word = 0;

  std::size_t word_count() const noexcept { return end_word - start_word; }

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

// Rule-based splitter. A word closes a sentence when, after stripping
// trailing quotes and brackets, it ends in '.', '!' or '?', it is not a
// listed abbreviation or a single-letter initial, and the following word is
// absent or starts with an uppercase letter, digit, opening quote or
// non-ASCII byte. Abbreviations are compared case-insensitively.
class SentenceSegmenter {
 public:
  // Uses the abbreviation list compiled in from data/abbreviations.txt.
  SentenceSegmenter();
  explicit SentenceSegmenter(std::unordered_set<std::string> abbreviations);

  static SentenceSegmenter from_file(const std::filesystem::path& path);

  std::vector<Sentence> segment(std::string_view text) const;

  bool is_abbreviation(std::string_view word) const;

 private:
  std::unordered_set<std::string> abbreviations_;
};

// Segments with the default segmenter.
std::vector<Sentence> segment_sentences(std::string_view text);

std::unordered_set<std::string> parse_abbreviation_list(std::string_view data);

}  // namespace newscap
