// PTB-style caption tokenization, approximating the Stanford PTBTokenizer
// run with -lowerCase followed by the COCO toolkit's punctuation filter.
// Bracket tokens are dropped together with the filtered punctuation.

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "newscap/metrics.hpp"
#include "newscap/text.hpp"

namespace newscap::metrics {
namespace {

const std::unordered_set<std::string_view> kDropped{
    "''", "'", "``", "`", "-lrb-", "-rrb-", "-lcb-", "-rcb-", ".", "?", "!",
    ",", ":", "-", "--", "...", ";", "(", ")", "[", "]", "{", "}", "\""};

const std::unordered_set<std::string_view> kAbbreviations{
    "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "jr.", "sr.", "gen.", "gov.",
    "sen.", "rep.", "lt.", "col.", "capt.", "sgt.", "rev.", "inc.", "corp.",
    "co.", "ltd.", "vs.", "etc.", "no.", "jan.", "feb.", "aug.", "sept.",
    "oct.", "nov.", "dec.", "ave.", "mt.", "ft."};

constexpr std::array<std::string_view, 6> kClitics{"'s", "'re", "'ve",
                                                    "'ll", "'d", "'m"};

bool is_leading_punct(char c) {
  return c == '"' || c == '\'' || c == '`' || c == '(' || c == '[' || c == '{';
}

bool is_trailing_punct(char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}' ||
         c == ',' || c == ';' || c == ':' || c == '?' || c == '!' || c == '%';
}

// "u.s.", "a.m.", single initials: letter-dot sequences.
bool is_dotted_acronym(std::string_view w) {
  if (w.size() < 2 || w.size() % 2 != 0) return false;
  for (std::size_t i = 0; i < w.size(); i += 2) {
    if (std::isalpha(static_cast<unsigned char>(w[i])) == 0 || w[i + 1] != '.') {
      return false;
    }
  }
  return true;
}

void split_core(std::string core, std::vector<std::string>& out) {
  // Inner dashes "--" separate tokens.
  std::size_t dash = core.find("--");
  if (dash != std::string::npos) {
    if (dash > 0) split_core(core.substr(0, dash), out);
    out.emplace_back("--");
    if (dash + 2 < core.size()) split_core(core.substr(dash + 2), out);
    return;
  }
  // Clitics: don't -> do n't, obama's -> obama 's.
  if (core.size() > 3 && core.ends_with("n't")) {
    out.push_back(core.substr(0, core.size() - 3));
    out.emplace_back("n't");
    return;
  }
  for (std::string_view clitic : kClitics) {
    if (core.size() > clitic.size() && core.ends_with(clitic)) {
      out.push_back(core.substr(0, core.size() - clitic.size()));
      out.emplace_back(clitic);
      return;
    }
  }
  if (!core.empty()) out.push_back(std::move(core));
}

void tokenize_chunk(std::string_view chunk, std::vector<std::string>& out) {
  std::vector<std::string> lead;
  while (!chunk.empty()) {
    if (is_leading_punct(chunk.front()) || chunk.front() == '$' ||
        chunk.front() == '#') {
      lead.emplace_back(1, chunk.front());
      chunk.remove_prefix(1);
    } else {
      break;
    }
  }
  std::vector<std::string> trail;  // reversed
  while (!chunk.empty()) {
    if (chunk.ends_with("...")) {
      trail.emplace_back("...");
      chunk.remove_suffix(3);
    } else if (is_trailing_punct(chunk.back())) {
      trail.emplace_back(1, chunk.back());
      chunk.remove_suffix(1);
    } else if (chunk.back() == '.') {
      if (kAbbreviations.contains(chunk) || is_dotted_acronym(chunk)) break;
      trail.emplace_back(".");
      chunk.remove_suffix(1);
    } else {
      break;
    }
  }
  for (auto& t : lead) out.push_back(std::move(t));
  split_core(std::string(chunk), out);
  for (auto it = trail.rbegin(); it != trail.rend(); ++it) out.push_back(std::move(*it));
}

}  // namespace

std::vector<std::string> ptb_tokenize(std::string_view caption) {
  const std::string lowered = text::to_lower_ascii(caption);
  std::vector<std::string> raw;
  for (std::string_view chunk : text::split_words(lowered)) {
    tokenize_chunk(chunk, raw);
  }
  std::vector<std::string> out;
  out.reserve(raw.size());
  for (auto& t : raw) {
    if (!kDropped.contains(t)) out.push_back(std::move(t));
  }
  return out;
}

std::string ptb_normalize(std::string_view caption) {
  return text::join(ptb_tokenize(caption), " ");
}

}  // namespace newscap::metrics
