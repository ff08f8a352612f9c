#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "newscap/alignment.hpp"

// Language-modeling loss arithmetic over externally computed token
// log-probabilities, and the weighted three-task objective.
namespace newscap::loss {

// Natural-log conditional probabilities of one target sequence.
struct TokenLogProbs {
  std::vector<double> values;
};

struct TaskWeights {
  double sent = 0.0;
  double ent = 0.0;
  double cap = 1.0;

  static TaskWeights goodnews() { return {0.5, 0.25, 1.0}; }
  static TaskWeights nytimes() { return {0.25, 0.75, 1.0}; }
  // "goodnews", "nytimes", or "w_sent,w_ent,w_cap".
  static TaskWeights parse(std::string_view spec);
};

void validate(const TaskWeights& w);

// -(1/n) * sum(log p). Throws InvalidArgument on an empty sequence or a
// log-probability that is positive or not finite.
double lm_loss(std::span<const double> log_probs);
inline double lm_loss(const TokenLogProbs& t) { return lm_loss(t.values); }

// Mean of per-sample losses.
double batch_loss(std::span<const TokenLogProbs> batch);

double weighted_total(double l_sent, double l_ent, double l_cap,
                      const TaskWeights& w);

// Log-prob audit file: {"sample_id", "task": "SENT"|"ENT"|"CAP",
// "logprobs": [...]} per line.
struct LogProbRecord {
  std::string sample_id;
  AlignmentTask task = AlignmentTask::kCap;
  TokenLogProbs log_probs;
};

std::vector<LogProbRecord> read_logprob_file(const std::filesystem::path& path);
std::vector<LogProbRecord> parse_logprob_records(std::string_view data);

struct LossAudit {
  std::map<AlignmentTask, std::size_t> samples;
  std::map<AlignmentTask, double> task_loss;  // batch mean per task
  TaskWeights weights;
  double total = 0.0;
};

// A task with no samples contributes a loss of 0.
LossAudit audit(std::span<const LogProbRecord> records, const TaskWeights& w);

}  // namespace newscap::loss
