#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "newscap/context.hpp"
#include "newscap/corpus.hpp"
#include "newscap/ner.hpp"

namespace newscap {

enum class AlignmentTask { kSent, kEnt, kCap };

std::string_view to_string(AlignmentTask task);
AlignmentTask parse_alignment_task(std::string_view s);

enum class SentProvenance { kPositive, kNegative, kCaptionPositive };

std::string_view to_string(SentProvenance p);

struct SentMetadata {
  // Absent for the caption-as-positive sample.
  std::optional<std::size_t> sentence_index;
  SentProvenance provenance = SentProvenance::kPositive;
  std::size_t visual_entity_count = 0;
};

struct EntMetadata {
  std::vector<std::string> candidates;  // deduplicated article surfaces
  std::vector<std::string> targets;     // caption-ordered intersection
};

struct CapMetadata {
  ContextRegime regime = ContextRegime::kOrigin;
};

struct AlignmentSample {
  std::string id;
  AlignmentTask task = AlignmentTask::kCap;
  std::string doc_id;
  std::string image_ref;
  std::string input_context;
  std::string target;
  std::variant<SentMetadata, EntMetadata, CapMetadata> metadata;
};

inline constexpr std::string_view kYes = "yes";
inline constexpr std::string_view kNo = "no";
inline constexpr std::string_view kEntityListSeparator = ", ";

// Entity-aware sentence selection samples for one document, in the order
// positives (article order), caption, negatives (article order).
//
// With E the distinct visual caption surfaces, a sentence's score is the
// number of E surfaces it contains at a word boundary. Positives are all
// sentences reaching the per-document maximum score (when that maximum is
// >= 1) plus the caption itself. Negatives are drawn uniformly without
// replacement from score-0 sentences; `neg_per_group` defaults to the
// number of positives and is clamped to what is available. Empty E yields
// no samples. Throws InvalidArgument when neg_per_group < 0.
std::vector<AlignmentSample> build_sentence_selection(
    const Document& doc, std::span<const Entity> caption_entities,
    const VisualEntityPolicy& policy, std::optional<int> neg_per_group,
    std::uint64_t seed);

// Entity selection sample: input is the article followed by a line listing
// the article's entity surfaces; target is the caption-ordered
// intersection joined with ", " (possibly empty).
AlignmentSample build_entity_selection(
    const Document& doc, std::span<const Entity> caption_entities,
    std::span<const Entity> article_entities,
    std::string_view entity_prompt = kDefaultEntityPrompt);

AlignmentSample build_caption_sample(const Document& doc,
                                     const SupplementedContext& context);
AlignmentSample build_caption_sample(const Document& doc, std::string context);

struct SampleStreams {
  std::vector<AlignmentSample> cap;
  std::vector<std::vector<AlignmentSample>> sent_sets;
  std::vector<AlignmentSample> ent;
};

struct MiniGroup {
  std::array<std::string, 2> cap_ids;
  std::vector<std::string> sent_ids;
  std::string ent_id;
};

struct MiniGroupAssembly {
  std::vector<MiniGroup> groups;
  std::vector<std::string> leftover_cap;
  std::vector<std::vector<std::string>> leftover_sent_sets;
  std::vector<std::string> leftover_ent;

  std::size_t leftover_count() const noexcept {
    return leftover_cap.size() + leftover_sent_sets.size() + leftover_ent.size();
  }
};

// Shuffles each stream with `seed`, then deals groups of 2 CAP + 1 SENT set
// + 1 ENT until a stream runs dry. Whatever remains is returned as
// leftovers. Throws InvalidArgument if any stream is empty.
MiniGroupAssembly assemble_minigroups(const SampleStreams& streams,
                                      std::uint64_t seed);

std::string serialize_sample(const AlignmentSample& sample);
AlignmentSample parse_sample(std::string_view line);
std::string serialize_minigroup(std::size_t index, const MiniGroup& group);

}  // namespace newscap
