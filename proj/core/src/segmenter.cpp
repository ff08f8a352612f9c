#include "newscap/segmenter.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "newscap/embedded_data.hpp"
#include "newscap/error.hpp"
#include "newscap/text.hpp"

namespace newscap {
namespace {

bool is_closer(char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}';
}

bool is_opener(char c) {
  return c == '"' || c == '\'' || c == '(' || c == '[' || c == '{' ||
         c == '`';
}

// Drops trailing ASCII closers and the UTF-8 right quotes U+2019 / U+201D.
std::string_view strip_closers(std::string_view w) {
  for (;;) {
    if (!w.empty() && is_closer(w.back())) {
      w.remove_suffix(1);
      continue;
    }
    if (w.size() >= 3 && static_cast<unsigned char>(w[w.size() - 3]) == 0xE2 &&
        static_cast<unsigned char>(w[w.size() - 2]) == 0x80) {
      const auto last = static_cast<unsigned char>(w.back());
      if (last == 0x99 || last == 0x9D) {
        w.remove_suffix(3);
        continue;
      }
    }
    return w;
  }
}

bool starts_sentence(std::string_view w) {
  std::size_t i = 0;
  while (i < w.size() && is_opener(w[i])) ++i;
  if (i > 0) return true;
  if (w.empty()) return false;
  const auto c = static_cast<unsigned char>(w.front());
  return c >= 0x80 || std::isupper(c) != 0 || std::isdigit(c) != 0;
}

bool is_initial(std::string_view core) {
  return core.size() == 2 && core[1] == '.' &&
         std::isupper(static_cast<unsigned char>(core[0])) != 0;
}

}  // namespace

std::unordered_set<std::string> parse_abbreviation_list(std::string_view data) {
  std::unordered_set<std::string> out;
  std::istringstream in{std::string(data)};
  std::string line;
  while (std::getline(in, line)) {
    const std::string entry = text::normalize_whitespace(line);
    if (entry.empty() || entry.front() == '#') continue;
    out.insert(text::to_lower_ascii(entry));
  }
  return out;
}

SentenceSegmenter::SentenceSegmenter()
    : abbreviations_(parse_abbreviation_list(embedded::kAbbreviations)) {}

SentenceSegmenter::SentenceSegmenter(
    std::unordered_set<std::string> abbreviations)
    : abbreviations_(std::move(abbreviations)) {}

SentenceSegmenter SentenceSegmenter::from_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open abbreviation list " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return SentenceSegmenter(parse_abbreviation_list(buf.str()));
}

bool SentenceSegmenter::is_abbreviation(std::string_view word) const {
  return abbreviations_.contains(text::to_lower_ascii(word));
}

std::vector<Sentence> SentenceSegmenter::segment(std::string_view text) const {
  const auto words = text::split_words(text);
  std::vector<Sentence> out;
  std::size_t start = 0;

  auto close = [&](std::size_t end) {
    Sentence s;
    s.index = out.size();
    s.start_word = start;
    s.end_word = end;
    s.text = text::join(
        std::span<const std::string_view>(words.data() + start, end - start),
        " ");
    out.push_back(std::move(s));
    start = end;
  };

  for (std::size_t i = 0; i < words.size(); ++i) {
    std::string_view core = strip_closers(words[i]);
    while (!core.empty() && is_opener(core.front())) core.remove_prefix(1);
    if (core.empty()) continue;
    const char last = core.back();
    if (last != '.' && last != '!' && last != '?') continue;
    if (last == '.' && (is_abbreviation(core) || is_initial(core))) continue;
    const bool at_end = i + 1 == words.size();
    if (!at_end && !starts_sentence(words[i + 1])) continue;
    close(i + 1);
  }
  if (start < words.size()) close(words.size());
  return out;
}

std::vector<Sentence> segment_sentences(std::string_view text) {
  static const SentenceSegmenter segmenter;
  return segmenter.segment(text);
}

}  // namespace newscap
