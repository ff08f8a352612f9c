#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "newscap/alignment.hpp"
#include "newscap/context.hpp"
#include "newscap/corpus.hpp"
#include "newscap/ner.hpp"

// Brute-force reference checks. Written independently of the library code
// they verify: plain loops, no shared helpers.
namespace newscap::testing {

// Tries every offset and checks the neighbouring bytes by hand.
bool naive_boundary_contains(std::string_view hay, std::string_view needle);

// Caption entities in caption order kept when their surface is among the
// article surfaces, first occurrence only.
std::vector<std::string> naive_ordered_intersection(const std::vector<Entity>& caption,
                                                    const std::vector<Entity>& article);

// Every broken alignment rule for one document, as readable messages.
std::vector<std::string> alignment_violations(const Document& doc,
                                              const std::vector<Entity>& caption_entities,
                                              const std::vector<Entity>& article_entities,
                                              const VisualEntityPolicy& policy,
                                              const std::vector<AlignmentSample>& sent,
                                              const AlignmentSample& ent);

// Every broken context rule: ascending duplicate-free indices, word counts
// consistent with the segments, the cap, and segment text present verbatim.
std::vector<std::string> context_violations(const Document& doc,
                                            const SupplementedContext& ctx,
                                            std::size_t sentence_cap);

// Per-occurrence classification of reference entities. A reference
// occurrence is matched when an unused generated occurrence with the same
// surface exists in the same document.
struct EntityOracle {
  std::size_t reference = 0;
  std::size_t generated = 0;
  std::size_t matched = 0;
  std::size_t in_reference = 0;
  std::size_t in_matched = 0;
  std::size_t out_reference = 0;
  std::size_t out_matched = 0;
};

EntityOracle brute_force_entities(const std::vector<std::vector<std::string>>& generated,
                                  const std::vector<std::vector<std::string>>& reference,
                                  const std::vector<std::string>& contexts);

}  // namespace newscap::testing
