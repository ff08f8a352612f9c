#include "newscap/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "newscap/error.hpp"
#include "newscap/text.hpp"

namespace newscap {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string read_file(const std::filesystem::path& path, std::string_view what) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + std::string(what) + " " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v * 100.0);
  return buf;
}

}  // namespace

TrainIndex parse_train_index(std::string_view data) {
  TrainIndex index;
  std::istringstream in{std::string(data)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::word_count(line) == 0) continue;
    index.insert(line);
  }
  return index;
}

TrainIndex load_train_index(const std::filesystem::path& path) {
  return parse_train_index(read_file(path, "train index"));
}

double EntityAnalysis::in_context_recall() const {
  return ratio(in_context_matched, in_context_reference);
}

double EntityAnalysis::out_context_recall() const {
  return ratio(out_context_matched, out_context_reference);
}

std::optional<PrecisionRecall> EntityAnalysis::out_of_train_pr() const {
  if (!out_of_train) return std::nullopt;
  return entity_pr(*out_of_train);
}

EntityAnalysis entity_report(std::span<const std::string> generated,
                             std::span<const std::string> references,
                             std::span<const std::string> contexts,
                             const Tagger& tagger, const TrainIndex* train_index,
                             std::span<const std::string> doc_ids) {
  if (generated.size() != references.size() || generated.size() != contexts.size() ||
      (!doc_ids.empty() && doc_ids.size() != generated.size())) {
    throw InvalidArgument("entity report inputs differ in length");
  }
  EntityAnalysis a;
  if (train_index != nullptr) a.out_of_train = MatchCounts{};
  for (std::size_t i = 0; i < generated.size(); ++i) {
    const std::string_view id = doc_ids.empty() ? std::string_view{} : doc_ids[i];
    std::map<std::string, std::size_t> ref_count, gen_count;
    for (const auto& e : tagger.tag(references[i], {id, TextField::kCaption})) {
      ++ref_count[e.surface];
    }
    for (const auto& e : tagger.tag(generated[i], {id, TextField::kGenerated})) {
      ++gen_count[e.surface];
    }
    for (const auto& [surface, r] : ref_count) {
      auto it = gen_count.find(surface);
      const std::size_t g = it == gen_count.end() ? 0 : it->second;
      const std::size_t m = std::min(r, g);
      a.overall.true_positives += m;
      a.overall.false_negatives += r - m;
      if (text::contains_at_word_boundary(contexts[i], surface)) {
        a.in_context_reference += r;
        a.in_context_matched += m;
      } else {
        a.out_context_reference += r;
        a.out_context_matched += m;
      }
      if (train_index != nullptr && !train_index->contains(surface)) {
        a.out_of_train->true_positives += m;
        a.out_of_train->false_negatives += r - m;
      }
    }
    for (const auto& [surface, g] : gen_count) {
      auto it = ref_count.find(surface);
      const std::size_t m = std::min(g, it == ref_count.end() ? 0 : it->second);
      a.overall.false_positives += g - m;
      if (train_index != nullptr && !train_index->contains(surface)) {
        a.out_of_train->false_positives += g - m;
      }
    }
  }
  return a;
}

EvalReport evaluate(std::span<const std::string> generated,
                    std::span<const std::string> references,
                    std::span<const std::string> contexts, const Tagger& tagger,
                    const TrainIndex* train_index,
                    std::span<const std::string> doc_ids) {
  EvalReport r;
  r.documents = generated.size();
  r.entities = entity_report(generated, references, contexts, tagger, train_index, doc_ids);
  r.scores = metrics::score_captions(generated, references);
  return r;
}

EvalReport merge_external_meteor(EvalReport report, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw InvalidArgument("METEOR value must lie in [0, 1], got " + std::to_string(value));
  }
  report.meteor = value;
  return report;
}

std::string render_table(const EvalReport& report) {
  const auto pr = report.entities.overall_pr();
  std::ostringstream out;
  auto row = [&](std::string_view name, const std::string& value) {
    out << name;
    for (std::size_t i = name.size(); i < 24; ++i) out << ' ';
    out << value << '\n';
  };
  row("documents", std::to_string(report.documents));
  row("BLEU-4", percent(report.scores.bleu4));
  row("METEOR", report.meteor ? percent(*report.meteor) + " (external)" : "not computed");
  row("ROUGE-L", percent(report.scores.rouge_l));
  row("CIDEr", percent(report.scores.cider));
  row("entity precision", percent(pr.precision));
  row("entity recall", percent(pr.recall));
  row("in-context recall", percent(report.entities.in_context_recall()));
  row("out-context recall", percent(report.entities.out_context_recall()));
  if (auto oot = report.entities.out_of_train_pr()) {
    row("out-of-train precision", percent(oot->precision));
    row("out-of-train recall", percent(oot->recall));
  }
  row("entities matched", std::to_string(report.entities.overall.true_positives));
  return out.str();
}

std::string report_json(const EvalReport& report) {
  const auto& e = report.entities;
  const auto pr = e.overall_pr();
  nlohmann::ordered_json j;
  j["documents"] = report.documents;
  j["bleu4"] = report.scores.bleu4;
  j["rouge_l"] = report.scores.rouge_l;
  j["cider"] = report.scores.cider;
  if (report.meteor) {
    j["meteor"] = {{"value", *report.meteor}, {"provenance", "external"}};
  } else {
    j["meteor"] = nullptr;
  }
  j["entity_precision"] = pr.precision;
  j["entity_recall"] = pr.recall;
  j["in_context_recall"] = e.in_context_recall();
  j["out_context_recall"] = e.out_context_recall();
  if (auto oot = e.out_of_train_pr()) {
    j["out_of_train_precision"] = oot->precision;
    j["out_of_train_recall"] = oot->recall;
  } else {
    j["out_of_train_precision"] = nullptr;
    j["out_of_train_recall"] = nullptr;
  }
  j["counts"] = {
      {"documents", report.documents},
      {"entities_matched", e.overall.true_positives},
      {"false_positives", e.overall.false_positives},
      {"false_negatives", e.overall.false_negatives},
      {"in_context_reference", e.in_context_reference},
      {"in_context_matched", e.in_context_matched},
      {"out_context_reference", e.out_context_reference},
      {"out_context_matched", e.out_context_matched},
  };
  return j.dump(2);
}

std::string serialize_prediction(const Prediction& p) {
  nlohmann::ordered_json j;
  j["doc_id"] = p.doc_id;
  j["caption"] = p.caption;
  return j.dump();
}

std::vector<Prediction> parse_predictions(std::string_view data) {
  std::vector<Prediction> out;
  std::istringstream in{std::string(data)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::word_count(line) == 0) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("doc_id").get<std::string>(), j.at("caption").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("malformed prediction at line " + std::to_string(n) + ": " +
                        e.what());
    }
  }
  return out;
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_file(path, "predictions file"));
}

}  // namespace newscap
