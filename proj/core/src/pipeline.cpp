#include "newscap/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

namespace newscap {
namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

ModelResponse traced_query(ModelEndpoint& endpoint, const ModelRequest& req,
                           const std::string& doc_id, std::vector<TraceEvent>& trace) {
  trace.push_back({now_ms(), doc_id, true, encode_request(req)});
  ModelResponse resp = endpoint.query(req);
  trace.push_back({now_ms(), doc_id, false, encode_response(resp)});
  return resp;
}

SelfSupplementedResult run_traced(const Document& doc, ModelEndpoint& endpoint,
                                  const PipelineConfig& config,
                                  std::vector<TraceEvent>& trace) {
  const SupplementedContext origin =
      origin_context(doc, config.style, config.origin_budget);

  std::vector<std::size_t> selected;
  for (const auto& s : doc.sentences) {
    ModelRequest req{doc.doc_id + ":sent:" + std::to_string(s.index),
                     ModelTask::kSentSelect, doc.image_ref, s.text};
    if (traced_query(endpoint, req, doc.doc_id, trace).answer) {
      selected.push_back(s.index);
    }
  }

  std::string ent_payload = origin.final_text;
  if (config.entity_scope == EntityScope::kOriginPlusSelected) {
    ent_payload = supplement_context(doc, selected, {}, origin, config.sentence_cap,
                                     config.entity_prompt)
                      .final_text;
  }
  ModelRequest ent_req{doc.doc_id + ":ent", ModelTask::kEntSelect, doc.image_ref,
                       ent_payload};
  const auto entities = traced_query(endpoint, ent_req, doc.doc_id, trace).entities;

  SelfSupplementedResult result;
  result.context = supplement_context(doc, selected, entities, origin,
                                      config.sentence_cap, config.entity_prompt);
  ModelRequest cap_req{doc.doc_id + ":cap", ModelTask::kCaption, doc.image_ref,
                       result.context.final_text};
  result.caption = traced_query(endpoint, cap_req, doc.doc_id, trace).caption;
  return result;
}

}  // namespace

std::string_view to_string(EntityScope scope) {
  return scope == EntityScope::kOrigin ? "origin" : "origin_plus_selected";
}

EntityScope parse_entity_scope(std::string_view s) {
  if (s == "origin") return EntityScope::kOrigin;
  if (s == "origin_plus_selected") return EntityScope::kOriginPlusSelected;
  throw InvalidArgument("unknown entity scope '" + std::string(s) + "'");
}

SelfSupplementedResult run_self_supplemented(const Document& doc,
                                             ModelEndpoint& endpoint,
                                             const PipelineConfig& config) {
  std::vector<TraceEvent> trace;
  SelfSupplementedResult r = run_traced(doc, endpoint, config, trace);
  r.trace = std::move(trace);
  return r;
}

DocumentOutcome run_document(const Document& doc, ModelEndpoint& endpoint,
                             const PipelineConfig& config) {
  DocumentOutcome out;
  out.doc_id = doc.doc_id;
  try {
    SelfSupplementedResult r = run_traced(doc, endpoint, config, out.trace);
    r.trace = out.trace;
    out.result = std::move(r);
  } catch (const Error& e) {
    out.error_kind = e.kind();
    out.error = e.what();
  }
  return out;
}

std::vector<DocumentOutcome> run_batch(std::span<const Document* const> docs,
                                       const EndpointFactory& factory,
                                       const PipelineConfig& config,
                                       std::size_t jobs) {
  std::vector<DocumentOutcome> outcomes(docs.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, docs.size()));
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto work = [&] {
    try {
      auto endpoint = factory();
      for (std::size_t i = next++; i < docs.size(); i = next++) {
        outcomes[i] = run_document(*docs[i], *endpoint, config);
        // A failed exchange may leave a stale reply in flight.
        if (!outcomes[i].ok()) endpoint = factory();
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  // Only endpoint construction can fail here; documents record their own.
  if (first_error) std::rethrow_exception(first_error);
  return outcomes;
}

}  // namespace newscap
