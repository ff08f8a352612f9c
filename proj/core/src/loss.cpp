#include "newscap/loss.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "newscap/error.hpp"
#include "newscap/text.hpp"

namespace newscap::loss {

TaskWeights TaskWeights::parse(std::string_view spec) {
  if (spec == "goodnews") return goodnews();
  if (spec == "nytimes") return nytimes();
  TaskWeights w;
  std::istringstream in{std::string(spec)};
  std::string part;
  std::vector<double> v;
  while (std::getline(in, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (!text::normalize_whitespace(part.substr(used)).empty()) {
        throw std::invalid_argument(part);
      }
    } catch (const std::exception&) {
      throw InvalidArgument("bad task weight '" + part + "'");
    }
  }
  if (v.size() != 3) {
    throw InvalidArgument("task weights need three values: w_sent,w_ent,w_cap");
  }
  w = {v[0], v[1], v[2]};
  validate(w);
  return w;
}

void validate(const TaskWeights& w) {
  if (!(w.sent >= 0.0) || !(w.ent >= 0.0) || !(w.cap > 0.0) ||
      !std::isfinite(w.sent) || !std::isfinite(w.ent) || !std::isfinite(w.cap)) {
    throw InvalidArgument("task weights must be finite, non-negative, with w_cap > 0");
  }
}

double lm_loss(std::span<const double> log_probs) {
  if (log_probs.empty()) throw InvalidArgument("empty token log-prob list");
  double sum = 0.0;
  for (double lp : log_probs) {
    if (!std::isfinite(lp) || lp > 0.0) {
      throw InvalidArgument("log-probabilities must be finite and <= 0");
    }
    sum += lp;
  }
  return -sum / static_cast<double>(log_probs.size());
}

double batch_loss(std::span<const TokenLogProbs> batch) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  double sum = 0.0;
  for (const auto& t : batch) sum += lm_loss(t);
  return sum / static_cast<double>(batch.size());
}

double weighted_total(double l_sent, double l_ent, double l_cap,
                      const TaskWeights& w) {
  validate(w);
  if (l_sent < 0.0 || l_ent < 0.0 || l_cap < 0.0) {
    throw InvalidArgument("task losses must be non-negative");
  }
  return w.sent * l_sent + w.ent * l_ent + w.cap * l_cap;
}

std::vector<LogProbRecord> parse_logprob_records(std::string_view data) {
  std::vector<LogProbRecord> out;
  std::istringstream in{std::string(data)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::word_count(line) == 0) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      LogProbRecord r;
      r.sample_id = j.at("sample_id").get<std::string>();
      r.task = parse_alignment_task(j.at("task").get<std::string>());
      r.log_probs.values = j.at("logprobs").get<std::vector<double>>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("malformed log-prob record at line " + std::to_string(n) +
                        ": " + e.what());
    }
  }
  return out;
}

std::vector<LogProbRecord> read_logprob_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open log-prob file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_logprob_records(buf.str());
}

LossAudit audit(std::span<const LogProbRecord> records, const TaskWeights& w) {
  std::map<AlignmentTask, std::vector<TokenLogProbs>> by_task;
  for (const auto& r : records) by_task[r.task].push_back(r.log_probs);
  LossAudit a;
  a.weights = w;
  for (auto t : {AlignmentTask::kSent, AlignmentTask::kEnt, AlignmentTask::kCap}) {
    const auto& batch = by_task[t];
    a.samples[t] = batch.size();
    a.task_loss[t] = batch.empty() ? 0.0 : batch_loss(batch);
  }
  a.total = weighted_total(a.task_loss[AlignmentTask::kSent],
                           a.task_loss[AlignmentTask::kEnt],
                           a.task_loss[AlignmentTask::kCap], w);
  return a;
}

}  // namespace newscap::loss
