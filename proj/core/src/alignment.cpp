#include "newscap/alignment.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

#include "newscap/error.hpp"
#include "newscap/rng.hpp"
#include "newscap/text.hpp"

namespace newscap {
namespace {

using nlohmann::ordered_json;

AlignmentSample sent_sample(const Document& doc, std::string id,
                            std::string sentence, bool positive,
                            SentMetadata meta) {
  AlignmentSample s;
  s.id = std::move(id);
  s.task = AlignmentTask::kSent;
  s.doc_id = doc.doc_id;
  s.image_ref = doc.image_ref;
  s.input_context = std::move(sentence);
  s.target = std::string(positive ? kYes : kNo);
  s.metadata = meta;
  return s;
}

std::string sentence_id(const Document& doc, std::size_t i) {
  return doc.doc_id + ":sent:" + std::to_string(i);
}

template <typename T>
std::vector<std::string> ids_of(std::span<const T> items) {
  std::vector<std::string> out;
  for (const auto& s : items) out.push_back(s.id);
  return out;
}

}  // namespace

std::string_view to_string(AlignmentTask task) {
  switch (task) {
    case AlignmentTask::kSent: return "SENT";
    case AlignmentTask::kEnt: return "ENT";
    case AlignmentTask::kCap: return "CAP";
  }
  return "CAP";
}

AlignmentTask parse_alignment_task(std::string_view s) {
  if (s == "SENT") return AlignmentTask::kSent;
  if (s == "ENT") return AlignmentTask::kEnt;
  if (s == "CAP") return AlignmentTask::kCap;
  throw SchemaError("unknown task tag '" + std::string(s) + "'");
}

std::string_view to_string(SentProvenance p) {
  switch (p) {
    case SentProvenance::kPositive: return "positive";
    case SentProvenance::kNegative: return "negative";
    case SentProvenance::kCaptionPositive: return "caption-as-positive";
  }
  return "positive";
}

std::vector<AlignmentSample> build_sentence_selection(
    const Document& doc, std::span<const Entity> caption_entities,
    const VisualEntityPolicy& policy, std::optional<int> neg_per_group,
    std::uint64_t seed) {
  if (neg_per_group && *neg_per_group < 0) {
    throw InvalidArgument("neg_per_group must be >= 0");
  }
  const auto visual = visual_entities(caption_entities, policy);
  const auto surfaces = unique_surfaces(visual);
  if (surfaces.empty()) return {};

  std::vector<std::size_t> score(doc.sentences.size(), 0);
  std::size_t best = 0;
  for (const auto& s : doc.sentences) {
    for (const auto& e : surfaces) {
      if (text::contains_at_word_boundary(s.text, e)) ++score[s.index];
    }
    best = std::max(best, score[s.index]);
  }

  std::vector<AlignmentSample> out;
  if (best > 0) {
    for (const auto& s : doc.sentences) {
      if (score[s.index] != best) continue;
      out.push_back(sent_sample(doc, sentence_id(doc, s.index), s.text, true,
                                {s.index, SentProvenance::kPositive, best}));
    }
  }
  std::size_t caption_score = 0;
  for (const auto& e : surfaces) {
    if (text::contains_at_word_boundary(doc.caption, e)) ++caption_score;
  }
  out.push_back(sent_sample(doc, doc.doc_id + ":sent:caption",
                            text::normalize_whitespace(doc.caption), true,
                            {std::nullopt, SentProvenance::kCaptionPositive,
                             caption_score}));

  std::vector<std::size_t> pool;
  for (const auto& s : doc.sentences) {
    if (score[s.index] == 0) pool.push_back(s.index);
  }
  const std::size_t wanted =
      neg_per_group ? static_cast<std::size_t>(*neg_per_group) : out.size();
  SeededRng rng(derive_seed(seed, doc.doc_id));
  auto picks = rng.sample_indices(pool.size(), wanted);
  std::sort(picks.begin(), picks.end());
  for (std::size_t p : picks) {
    const Sentence& s = doc.sentences[pool[p]];
    out.push_back(sent_sample(doc, sentence_id(doc, s.index), s.text, false,
                              {s.index, SentProvenance::kNegative, 0}));
  }
  return out;
}

AlignmentSample build_entity_selection(const Document& doc,
                                       std::span<const Entity> caption_entities,
                                       std::span<const Entity> article_entities,
                                       std::string_view entity_prompt) {
  EntMetadata meta;
  meta.candidates = unique_surfaces(article_entities);
  meta.targets = ordered_entity_intersection(caption_entities, article_entities);

  AlignmentSample s;
  s.id = doc.doc_id + ":ent";
  s.task = AlignmentTask::kEnt;
  s.doc_id = doc.doc_id;
  s.image_ref = doc.image_ref;
  s.input_context = text::normalize_whitespace(doc.article_text);
  s.input_context += '\n';
  s.input_context += entity_prompt;
  if (!meta.candidates.empty()) {
    s.input_context += ' ';
    s.input_context += text::join(meta.candidates, kEntityListSeparator);
  }
  s.target = text::join(meta.targets, kEntityListSeparator);
  s.metadata = std::move(meta);
  return s;
}

AlignmentSample build_caption_sample(const Document& doc,
                                     const SupplementedContext& context) {
  AlignmentSample s = build_caption_sample(doc, context.final_text);
  s.metadata = CapMetadata{context.regime};
  return s;
}

AlignmentSample build_caption_sample(const Document& doc, std::string context) {
  AlignmentSample s;
  s.id = doc.doc_id + ":cap";
  s.task = AlignmentTask::kCap;
  s.doc_id = doc.doc_id;
  s.image_ref = doc.image_ref;
  s.input_context = std::move(context);
  s.target = doc.caption;
  s.metadata = CapMetadata{};
  return s;
}

MiniGroupAssembly assemble_minigroups(const SampleStreams& streams,
                                      std::uint64_t seed) {
  if (streams.cap.empty() || streams.sent_sets.empty() || streams.ent.empty()) {
    throw InvalidArgument(
        "mini-group assembly needs non-empty CAP, SENT and ENT streams");
  }
  std::vector<std::string> cap = ids_of<AlignmentSample>(streams.cap);
  std::vector<std::string> ent = ids_of<AlignmentSample>(streams.ent);
  std::vector<std::vector<std::string>> sent;
  for (const auto& set : streams.sent_sets) {
    sent.push_back(ids_of<AlignmentSample>(set));
  }

  // One generator, fixed stream order: CAP, SENT, ENT.
  SeededRng rng(seed);
  rng.shuffle(std::span(cap));
  rng.shuffle(std::span(sent));
  rng.shuffle(std::span(ent));

  const std::size_t n = std::min({cap.size() / 2, sent.size(), ent.size()});
  MiniGroupAssembly out;
  out.groups.reserve(n);
  for (std::size_t g = 0; g < n; ++g) {
    MiniGroup mg;
    mg.cap_ids = {cap[2 * g], cap[2 * g + 1]};
    mg.sent_ids = sent[g];
    mg.ent_id = ent[g];
    out.groups.push_back(std::move(mg));
  }
  out.leftover_cap.assign(cap.begin() + static_cast<std::ptrdiff_t>(2 * n), cap.end());
  out.leftover_sent_sets.assign(sent.begin() + static_cast<std::ptrdiff_t>(n), sent.end());
  out.leftover_ent.assign(ent.begin() + static_cast<std::ptrdiff_t>(n), ent.end());
  return out;
}

std::string serialize_sample(const AlignmentSample& s) {
  ordered_json j;
  j["id"] = s.id;
  j["task"] = to_string(s.task);
  j["doc_id"] = s.doc_id;
  j["image_ref"] = s.image_ref;
  j["input_context"] = s.input_context;
  j["input_words"] = text::word_count(s.input_context);
  j["target"] = s.target;
  ordered_json meta = ordered_json::object();
  if (const auto* m = std::get_if<SentMetadata>(&s.metadata)) {
    meta["sentence_index"] = m->sentence_index ? ordered_json(*m->sentence_index)
                                               : ordered_json(nullptr);
    meta["provenance"] = to_string(m->provenance);
    meta["visual_entity_count"] = m->visual_entity_count;
  } else if (const auto* m = std::get_if<EntMetadata>(&s.metadata)) {
    meta["candidates"] = m->candidates;
    meta["targets"] = m->targets;
  } else if (const auto* m = std::get_if<CapMetadata>(&s.metadata)) {
    meta["regime"] = to_string(m->regime);
  }
  j["metadata"] = std::move(meta);
  return j.dump();
}

AlignmentSample parse_sample(std::string_view line) {
  try {
    const auto j = ordered_json::parse(line);
    AlignmentSample s;
    s.id = j.at("id").get<std::string>();
    s.task = parse_alignment_task(j.at("task").get<std::string>());
    s.doc_id = j.at("doc_id").get<std::string>();
    s.image_ref = j.at("image_ref").get<std::string>();
    s.input_context = j.at("input_context").get<std::string>();
    s.target = j.at("target").get<std::string>();
    const auto& meta = j.at("metadata");
    switch (s.task) {
      case AlignmentTask::kSent: {
        SentMetadata m;
        if (!meta.at("sentence_index").is_null()) {
          m.sentence_index = meta.at("sentence_index").get<std::size_t>();
        }
        const auto prov = meta.at("provenance").get<std::string>();
        for (auto p : {SentProvenance::kPositive, SentProvenance::kNegative,
                       SentProvenance::kCaptionPositive}) {
          if (to_string(p) == prov) m.provenance = p;
        }
        m.visual_entity_count = meta.at("visual_entity_count").get<std::size_t>();
        s.metadata = m;
        break;
      }
      case AlignmentTask::kEnt: {
        EntMetadata m;
        m.candidates = meta.at("candidates").get<std::vector<std::string>>();
        m.targets = meta.at("targets").get<std::vector<std::string>>();
        s.metadata = std::move(m);
        break;
      }
      case AlignmentTask::kCap:
        s.metadata = CapMetadata{parse_context_regime(meta.at("regime").get<std::string>())};
        break;
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed sample record: ") + e.what());
  }
}

std::string serialize_minigroup(std::size_t index, const MiniGroup& group) {
  ordered_json j;
  j["group"] = index;
  j["cap"] = group.cap_ids;
  j["sent"] = group.sent_ids;
  j["ent"] = group.ent_id;
  return j.dump();
}

}  // namespace newscap
