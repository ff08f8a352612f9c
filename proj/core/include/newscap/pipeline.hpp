#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "newscap/context.hpp"
#include "newscap/corpus.hpp"
#include "newscap/error.hpp"
#include "newscap/gateway.hpp"

// Two-stage self-supplemented generation: the model first answers yes/no
// for every article sentence and lists entities of the origin context, then
// captions the supplemented context.
namespace newscap {

// Text the ent_select request is asked over.
enum class EntityScope {
  kOrigin,              // origin context only
  kOriginPlusSelected,  // origin merged with the sentences answered "yes"
};

std::string_view to_string(EntityScope scope);
EntityScope parse_entity_scope(std::string_view s);

struct PipelineConfig {
  CorpusStyle style = CorpusStyle::kGeneric;
  std::size_t origin_budget = kDefaultOriginBudget;
  std::size_t sentence_cap = kDefaultSentenceCap;
  std::string entity_prompt{kDefaultEntityPrompt};
  EntityScope entity_scope = EntityScope::kOrigin;
};

struct SelfSupplementedResult {
  SupplementedContext context;
  std::string caption;
  std::vector<TraceEvent> trace;
};

// Request ids are "<doc_id>:sent:<i>", "<doc_id>:ent" and "<doc_id>:cap".
// Every request of the document goes to `endpoint` in order; the caption
// request is issued only after all extraction responses arrived. Errors
// propagate.
SelfSupplementedResult run_self_supplemented(const Document& doc,
                                             ModelEndpoint& endpoint,
                                             const PipelineConfig& config);

struct DocumentOutcome {
  std::string doc_id;
  std::optional<SelfSupplementedResult> result;
  // Set when the document failed; the trace still holds what was exchanged.
  std::optional<ErrorKind> error_kind;
  std::string error;
  std::vector<TraceEvent> trace;

  bool ok() const noexcept { return result.has_value(); }
};

// Never throws for per-document failures.
DocumentOutcome run_document(const Document& doc, ModelEndpoint& endpoint,
                             const PipelineConfig& config);

// Runs documents on up to `jobs` workers, each with its own endpoint from
// `factory`. Outcomes come back in input order regardless of `jobs`.
std::vector<DocumentOutcome> run_batch(std::span<const Document* const> docs,
                                       const EndpointFactory& factory,
                                       const PipelineConfig& config,
                                       std::size_t jobs);

}  // namespace newscap
