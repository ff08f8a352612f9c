#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "newscap/metrics.hpp"
#include "newscap/ner.hpp"

// Corpus evaluation: n-gram metrics plus entity precision/recall, recall of
// reference entities split by presence in the model's textual input, and
// the same analysis restricted to entities unseen in training.
namespace newscap {

// Entity surfaces seen in training contexts or captions.
using TrainIndex = std::unordered_set<std::string>;

// One surface per line; blank lines skipped.
TrainIndex parse_train_index(std::string_view data);
TrainIndex load_train_index(const std::filesystem::path& path);

struct EntityAnalysis {
  // Multiset-clipped exact matches over the whole corpus.
  MatchCounts overall;
  // Reference entity occurrences whose surface occurs in the document's
  // context at a word boundary, and how many of them were matched.
  std::size_t in_context_reference = 0;
  std::size_t in_context_matched = 0;
  std::size_t out_context_reference = 0;
  std::size_t out_context_matched = 0;
  // Present only when a train index was supplied. Counts restricted to
  // surfaces absent from the index.
  std::optional<MatchCounts> out_of_train;

  PrecisionRecall overall_pr() const { return entity_pr(overall); }
  double in_context_recall() const;
  double out_context_recall() const;
  std::optional<PrecisionRecall> out_of_train_pr() const;
};

// All lists must have equal length (InvalidArgument otherwise). `doc_ids`
// identify the texts for annotation-replaying taggers and may be empty.
EntityAnalysis entity_report(std::span<const std::string> generated,
                             std::span<const std::string> references,
                             std::span<const std::string> contexts,
                             const Tagger& tagger,
                             const TrainIndex* train_index = nullptr,
                             std::span<const std::string> doc_ids = {});

struct EvalReport {
  std::size_t documents = 0;
  metrics::CaptionScores scores;
  EntityAnalysis entities;
  std::optional<double> meteor;  // imported, in [0, 1]
};

EvalReport evaluate(std::span<const std::string> generated,
                    std::span<const std::string> references,
                    std::span<const std::string> contexts, const Tagger& tagger,
                    const TrainIndex* train_index = nullptr,
                    std::span<const std::string> doc_ids = {});

// Throws InvalidArgument unless 0 <= value <= 1.
EvalReport merge_external_meteor(EvalReport report, double value);

// All rates shown x100 with two decimals; METEOR marked as external or
// "not computed".
std::string render_table(const EvalReport& report);
// Natural units (rates in [0, 1], CIDEr in [0, 10]).
std::string report_json(const EvalReport& report);

// Predictions file: {"doc_id", "caption"} per line.
struct Prediction {
  std::string doc_id;
  std::string caption;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

std::string serialize_prediction(const Prediction& p);
std::vector<Prediction> parse_predictions(std::string_view data);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

}  // namespace newscap
