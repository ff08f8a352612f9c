#include "newscap/context.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <set>

#include "newscap/error.hpp"
#include "newscap/text.hpp"

namespace newscap {
namespace {

using nlohmann::ordered_json;

ContextSegment whole(const Document& doc, std::size_t i) {
  const Sentence& s = doc.sentences.at(i);
  return {i, s.start_word, s.end_word};
}

std::string segment_text(const Document& doc, const ContextSegment& seg) {
  const Sentence& s = doc.sentences.at(seg.sentence);
  if (seg.begin_word == s.start_word && seg.end_word == s.end_word) {
    return s.text;
  }
  const auto words = text::split_words(s.text);
  return text::join(
      std::span<const std::string_view>(words).subspan(
          seg.begin_word - s.start_word, seg.end_word - seg.begin_word),
      " ");
}

// Fills final_text and the word counts from segments and hints.
void assemble(const Document& doc, SupplementedContext& ctx,
              std::string_view entity_prompt) {
  std::string body;
  std::size_t words = 0;
  for (const auto& seg : ctx.segments) {
    if (!body.empty()) body += ' ';
    body += segment_text(doc, seg);
    words += seg.word_count();
  }
  ctx.sentence_word_count = words;
  if (!ctx.entity_hints.empty()) {
    std::string line(entity_prompt);
    line += ' ';
    line += text::join(ctx.entity_hints, ", ");
    if (!body.empty()) body += '\n';
    body += line;
  }
  ctx.final_text = std::move(body);
  ctx.total_word_count = text::word_count(ctx.final_text);
}

std::vector<std::string> dedupe(std::span<const std::string> items) {
  std::vector<std::string> out;
  std::set<std::string_view> seen;
  for (const auto& s : items) {
    if (seen.insert(s).second) out.push_back(s);
  }
  return out;
}

SupplementedContext prefix_window(const Document& doc, std::size_t budget) {
  SupplementedContext ctx;
  for (const auto& s : doc.sentences) {
    if (s.start_word >= budget) break;
    ctx.segments.push_back({s.index, s.start_word, std::min(s.end_word, budget)});
  }
  return ctx;
}

SupplementedContext image_window(const Document& doc, std::size_t budget) {
  const std::size_t anchor = doc.sentence_at_word(*doc.image_position);
  const std::size_t n = doc.sentences.size();
  const std::size_t forward_share = budget - budget / 2;
  std::vector<std::size_t> picked;
  std::size_t used = 0;

  std::size_t next = anchor;
  if (doc.sentences[anchor].word_count() <= budget) {
    used = doc.sentences[anchor].word_count();
    picked.push_back(anchor);
    next = anchor + 1;
    while (next < n && used + doc.sentences[next].word_count() <= forward_share) {
      used += doc.sentences[next].word_count();
      picked.push_back(next++);
    }
    std::size_t prev = anchor;
    while (prev > 0 && used + doc.sentences[prev - 1].word_count() <= budget) {
      used += doc.sentences[prev - 1].word_count();
      picked.push_back(--prev);
    }
    while (next < n && used + doc.sentences[next].word_count() <= budget) {
      used += doc.sentences[next].word_count();
      picked.push_back(next++);
    }
  }
  std::sort(picked.begin(), picked.end());
  SupplementedContext ctx;
  for (std::size_t i : picked) ctx.segments.push_back(whole(doc, i));
  return ctx;
}

}  // namespace

std::string_view to_string(ContextRegime regime) {
  switch (regime) {
    case ContextRegime::kOrigin: return "origin";
    case ContextRegime::kFull: return "full";
    case ContextRegime::kOriginLonger: return "origin_longer";
    case ContextRegime::kOracleSent: return "oracle_sent";
    case ContextRegime::kOracleEnt: return "oracle_ent";
    case ContextRegime::kOracleSentEnt: return "oracle_sent_ent";
    case ContextRegime::kSupplemented: return "supplemented";
  }
  return "origin";
}

ContextRegime parse_context_regime(std::string_view s) {
  for (auto r : {ContextRegime::kOrigin, ContextRegime::kFull,
                 ContextRegime::kOriginLonger, ContextRegime::kOracleSent,
                 ContextRegime::kOracleEnt, ContextRegime::kOracleSentEnt,
                 ContextRegime::kSupplemented}) {
    if (to_string(r) == s) return r;
  }
  throw InvalidArgument("unknown context regime '" + std::string(s) + "'");
}

std::vector<std::size_t> SupplementedContext::sentence_indices() const {
  std::vector<std::size_t> out;
  out.reserve(segments.size());
  for (const auto& s : segments) out.push_back(s.sentence);
  return out;
}

SupplementedContext origin_context(const Document& doc, CorpusStyle style,
                                   std::size_t budget_words) {
  if (budget_words < 1) throw InvalidArgument("origin budget must be >= 1");
  SupplementedContext ctx;
  if (style == CorpusStyle::kNyTimes) {
    if (!doc.image_position) {
      throw InvalidArgument("nytimes-style origin context needs image_position (doc " +
                            doc.doc_id + ")");
    }
    ctx = image_window(doc, budget_words);
  } else {
    ctx = prefix_window(doc, budget_words);
  }
  ctx.regime = ContextRegime::kOrigin;
  assemble(doc, ctx, kDefaultEntityPrompt);
  return ctx;
}

SupplementedContext full_context(const Document& doc) {
  SupplementedContext ctx;
  ctx.regime = ContextRegime::kFull;
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    ctx.segments.push_back(whole(doc, i));
  }
  assemble(doc, ctx, kDefaultEntityPrompt);
  return ctx;
}

std::vector<std::size_t> oracle_sentences(const Document& doc,
                                          std::span<const Entity> caption_entities) {
  const auto surfaces = unique_surfaces(caption_entities);
  std::vector<std::size_t> out;
  for (const auto& s : doc.sentences) {
    const bool hit = std::any_of(surfaces.begin(), surfaces.end(), [&](const std::string& e) {
      return text::contains_at_word_boundary(s.text, e);
    });
    if (hit) out.push_back(s.index);
  }
  return out;
}

std::vector<std::string> oracle_entities(std::span<const Entity> caption_entities,
                                         std::span<const Entity> article_entities) {
  return ordered_entity_intersection(caption_entities, article_entities);
}

SupplementedContext supplement_context(
    const Document& doc, std::span<const std::size_t> selected_sentences,
    std::span<const std::string> selected_entities,
    const SupplementedContext& origin, std::size_t sentence_cap_words,
    std::string_view entity_prompt) {
  if (sentence_cap_words < 1) throw InvalidArgument("sentence cap must be >= 1");
  std::set<std::size_t> merged;
  for (const auto& seg : origin.segments) merged.insert(seg.sentence);
  for (std::size_t i : selected_sentences) {
    if (i >= doc.sentences.size()) {
      throw InvalidArgument("sentence index " + std::to_string(i) +
                            " out of range for doc " + doc.doc_id);
    }
    merged.insert(i);
  }
  SupplementedContext ctx;
  ctx.regime = ContextRegime::kSupplemented;
  std::size_t used = 0;
  for (std::size_t i : merged) {
    auto it = std::find_if(origin.segments.begin(), origin.segments.end(),
                           [&](const ContextSegment& s) { return s.sentence == i; });
    const ContextSegment seg = it != origin.segments.end() ? *it : whole(doc, i);
    if (used + seg.word_count() > sentence_cap_words) break;
    used += seg.word_count();
    ctx.segments.push_back(seg);
  }
  ctx.entity_hints = dedupe(selected_entities);
  assemble(doc, ctx, entity_prompt);
  return ctx;
}

SupplementedContext origin_longer_context(const Document& doc, CorpusStyle style,
                                         std::size_t default_budget,
                                         std::size_t supplemented_words) {
  SupplementedContext ctx =
      origin_context(doc, style, std::max(default_budget, supplemented_words));
  ctx.regime = ContextRegime::kOriginLonger;
  return ctx;
}

SupplementedContext oracle_sentence_context(const Document& doc,
                                            std::span<const Entity> caption_entities,
                                            std::size_t sentence_cap_words) {
  const SupplementedContext empty;
  SupplementedContext ctx = supplement_context(
      doc, oracle_sentences(doc, caption_entities), {}, empty, sentence_cap_words);
  ctx.regime = ContextRegime::kOracleSent;
  return ctx;
}

SupplementedContext oracle_entity_context(const Document& doc,
                                          const SupplementedContext& origin,
                                          std::span<const Entity> caption_entities,
                                          std::span<const Entity> article_entities,
                                          std::string_view entity_prompt) {
  SupplementedContext ctx = origin;
  ctx.regime = ContextRegime::kOracleEnt;
  ctx.entity_hints = oracle_entities(caption_entities, article_entities);
  assemble(doc, ctx, entity_prompt);
  return ctx;
}

SupplementedContext oracle_sentence_entity_context(
    const Document& doc, const SupplementedContext& origin,
    std::span<const Entity> caption_entities,
    std::span<const Entity> article_entities, std::size_t sentence_cap_words,
    std::string_view entity_prompt) {
  const auto entities = oracle_entities(caption_entities, article_entities);
  SupplementedContext ctx =
      supplement_context(doc, oracle_sentences(doc, caption_entities), entities,
                         origin, sentence_cap_words, entity_prompt);
  ctx.regime = ContextRegime::kOracleSentEnt;
  return ctx;
}

std::string serialize_context(std::string_view doc_id,
                              const SupplementedContext& ctx) {
  ordered_json j;
  j["doc_id"] = doc_id;
  j["regime"] = to_string(ctx.regime);
  j["sentence_indices"] = ctx.sentence_indices();
  auto& segs = j["segments"] = ordered_json::array();
  for (const auto& s : ctx.segments) {
    segs.push_back({s.sentence, s.begin_word, s.end_word});
  }
  j["entity_hints"] = ctx.entity_hints;
  j["sentence_words"] = ctx.sentence_word_count;
  j["total_words"] = ctx.total_word_count;
  j["final_text"] = ctx.final_text;
  return j.dump();
}

ContextRecord parse_context_record(std::string_view line) {
  try {
    const auto j = ordered_json::parse(line);
    ContextRecord rec;
    rec.doc_id = j.at("doc_id").get<std::string>();
    auto& ctx = rec.context;
    ctx.regime = parse_context_regime(j.at("regime").get<std::string>());
    for (const auto& s : j.at("segments")) {
      ctx.segments.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>(),
                              s.at(2).get<std::size_t>()});
    }
    ctx.entity_hints = j.at("entity_hints").get<std::vector<std::string>>();
    ctx.sentence_word_count = j.at("sentence_words").get<std::size_t>();
    ctx.total_word_count = j.at("total_words").get<std::size_t>();
    ctx.final_text = j.at("final_text").get<std::string>();
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed context record: ") + e.what());
  }
}

}  // namespace newscap
