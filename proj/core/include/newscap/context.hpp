#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "newscap/corpus.hpp"
#include "newscap/ner.hpp"

namespace newscap {

inline constexpr std::size_t kDefaultOriginBudget = 500;
inline constexpr std::size_t kDefaultSentenceCap = 600;
inline constexpr std::string_view kDefaultEntityPrompt =
    "The possible related entities are:";

enum class ContextRegime {
  kOrigin,
  kFull,
  kOriginLonger,
  kOracleSent,
  kOracleEnt,
  kOracleSentEnt,
  kSupplemented,
};

std::string_view to_string(ContextRegime regime);
ContextRegime parse_context_regime(std::string_view s);

// A contiguous run of article words inside one sentence. Origin contexts
// built by the prefix rule may end in a partial sentence; every other
// segment covers its whole sentence.
struct ContextSegment {
  std::size_t sentence = 0;
  std::size_t begin_word = 0;
  std::size_t end_word = 0;

  std::size_t word_count() const noexcept { return end_word - begin_word; }
  friend bool operator==(const ContextSegment&, const ContextSegment&) = default;
};

struct SupplementedContext {
  ContextRegime regime = ContextRegime::kOrigin;
  // Strictly ascending by sentence, one segment per sentence.
  std::vector<ContextSegment> segments;
  std::vector<std::string> entity_hints;
  // Sentence portion, then (when hints exist) one line of
  // "<prompt> <hint>, <hint>, ...".
  std::string final_text;
  std::size_t sentence_word_count = 0;
  std::size_t total_word_count = 0;

  std::vector<std::size_t> sentence_indices() const;
};

// GoodNews / generic style: the first `budget_words` words of the article.
// NYTimes style: whole sentences around the image. Forward from the image
// sentence up to ceil(budget/2) words (the image sentence itself only has to
// fit the full budget), then backward from the preceding sentence, then
// forward again with whatever budget remains; each pass stops at the first
// sentence that would overflow.
SupplementedContext origin_context(const Document& doc, CorpusStyle style,
                                   std::size_t budget_words = kDefaultOriginBudget);

SupplementedContext full_context(const Document& doc);

// Indices of sentences containing any caption-entity surface at a word
// boundary, ascending. All labels count.
std::vector<std::size_t> oracle_sentences(const Document& doc,
                                          std::span<const Entity> caption_entities);

std::vector<std::string> oracle_entities(std::span<const Entity> caption_entities,
                                         std::span<const Entity> article_entities);

// Merges origin's sentences with `selected_sentences` (deduplicated, article
// order). Origin segments are kept verbatim, other sentences enter whole.
// Sentences are taken in order until the next one would push the sentence
// portion past `sentence_cap_words`. Throws InvalidArgument on a bad index.
SupplementedContext supplement_context(
    const Document& doc, std::span<const std::size_t> selected_sentences,
    std::span<const std::string> selected_entities,
    const SupplementedContext& origin,
    std::size_t sentence_cap_words = kDefaultSentenceCap,
    std::string_view entity_prompt = kDefaultEntityPrompt);

// Origin rule at max(default_budget, supplemented_words).
SupplementedContext origin_longer_context(const Document& doc, CorpusStyle style,
                                         std::size_t default_budget,
                                         std::size_t supplemented_words);

// Oracle sentences alone, capped like the supplemented context.
SupplementedContext oracle_sentence_context(
    const Document& doc, std::span<const Entity> caption_entities,
    std::size_t sentence_cap_words = kDefaultSentenceCap);

// Origin text plus the oracle entity line.
SupplementedContext oracle_entity_context(
    const Document& doc, const SupplementedContext& origin,
    std::span<const Entity> caption_entities,
    std::span<const Entity> article_entities,
    std::string_view entity_prompt = kDefaultEntityPrompt);

// Origin supplemented with oracle sentences and oracle entities.
SupplementedContext oracle_sentence_entity_context(
    const Document& doc, const SupplementedContext& origin,
    std::span<const Entity> caption_entities,
    std::span<const Entity> article_entities,
    std::size_t sentence_cap_words = kDefaultSentenceCap,
    std::string_view entity_prompt = kDefaultEntityPrompt);

// One JSON line per context.
std::string serialize_context(std::string_view doc_id,
                              const SupplementedContext& ctx);

struct ContextRecord {
  std::string doc_id;
  SupplementedContext context;
};
ContextRecord parse_context_record(std::string_view line);

}  // namespace newscap
