#include "newscap/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "newscap/error.hpp"
#include "newscap/text.hpp"

namespace newscap::metrics {
namespace {

constexpr int kMaxN = 4;

using NgramCounts = std::array<std::unordered_map<std::string, int>, kMaxN>;

void check_corpus(std::size_t candidates, std::size_t references) {
  if (candidates != references) {
    throw InvalidArgument("candidate/reference count mismatch: " +
                          std::to_string(candidates) + " vs " +
                          std::to_string(references));
  }
  if (candidates == 0) throw InvalidArgument("empty evaluation corpus");
}

std::vector<std::string> tokens_of(std::string_view s) {
  std::vector<std::string> out;
  for (auto w : text::split_words(s)) out.emplace_back(w);
  return out;
}

NgramCounts count_ngrams(const std::vector<std::string>& words) {
  NgramCounts counts;
  for (int n = 1; n <= kMaxN; ++n) {
    for (std::size_t i = 0; i + n <= words.size(); ++i) {
      std::string key = words[i];
      for (int k = 1; k < n; ++k) {
        key += ' ';
        key += words[i + k];
      }
      ++counts[n - 1][key];
    }
  }
  return counts;
}

std::size_t lcs_length(const std::vector<std::string>& a,
                       const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// The toolkit splits on a single space, so an empty caption is one empty
// token rather than zero tokens.
std::vector<std::string> rouge_tokens(std::string_view s) {
  auto t = tokens_of(s);
  if (t.empty()) t.emplace_back();
  return t;
}

std::vector<std::string> normalize_all(std::span<const std::string> captions) {
  std::vector<std::string> out;
  out.reserve(captions.size());
  for (const auto& c : captions) out.push_back(ptb_normalize(c));
  return out;
}

}  // namespace

double bleu4_tokenized(std::span<const std::string> candidates,
                       std::span<const std::string> references) {
  check_corpus(candidates.size(), references.size());
  // Smoothing constants of the reference implementation.
  constexpr double kTiny = 1e-15;
  constexpr double kSmall = 1e-9;

  std::array<double, kMaxN> guess{}, correct{};
  double test_len = 0.0, ref_len = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto cand = tokens_of(candidates[i]);
    const auto ref = tokens_of(references[i]);
    test_len += static_cast<double>(cand.size());
    ref_len += static_cast<double>(ref.size());
    const auto cc = count_ngrams(cand);
    const auto rc = count_ngrams(ref);
    for (int n = 0; n < kMaxN; ++n) {
      guess[n] += static_cast<double>(
          cand.size() >= static_cast<std::size_t>(n + 1) ? cand.size() - n : 0);
      for (const auto& [gram, count] : cc[n]) {
        auto it = rc[n].find(gram);
        if (it != rc[n].end()) correct[n] += std::min(count, it->second);
      }
    }
  }
  double bleu = 1.0;
  for (int n = 0; n < kMaxN; ++n) {
    bleu *= (correct[n] + kTiny) / (guess[n] + kSmall);
  }
  double score = std::pow(bleu, 1.0 / kMaxN);
  const double ratio = (test_len + kTiny) / (ref_len + kSmall);
  if (ratio < 1.0) score *= std::exp(1.0 - 1.0 / ratio);
  return score;
}

double rouge_l_tokenized(std::span<const std::string> candidates,
                         std::span<const std::string> references) {
  check_corpus(candidates.size(), references.size());
  constexpr double kBeta = 1.2;
  double sum = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto cand = rouge_tokens(candidates[i]);
    const auto ref = rouge_tokens(references[i]);
    const double lcs = static_cast<double>(lcs_length(ref, cand));
    const double prec = lcs / static_cast<double>(cand.size());
    const double rec = lcs / static_cast<double>(ref.size());
    if (prec != 0.0 && rec != 0.0) {
      sum += ((1 + kBeta * kBeta) * prec * rec) / (rec + kBeta * kBeta * prec);
    }
  }
  return sum / static_cast<double>(candidates.size());
}

std::vector<double> cider_scores_tokenized(std::span<const std::string> candidates,
                                           std::span<const std::string> references) {
  check_corpus(candidates.size(), references.size());
  constexpr double kSigma = 6.0;

  std::vector<NgramCounts> cand_counts, ref_counts;
  cand_counts.reserve(candidates.size());
  ref_counts.reserve(references.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    cand_counts.push_back(count_ngrams(tokens_of(candidates[i])));
    ref_counts.push_back(count_ngrams(tokens_of(references[i])));
  }

  // Document frequency over references only.
  std::unordered_map<std::string, double> df;
  for (const auto& rc : ref_counts) {
    for (const auto& level : rc) {
      for (const auto& [gram, _] : level) df[gram] += 1.0;
    }
  }
  const double log_n = std::log(static_cast<double>(candidates.size()));

  struct Vec {
    std::array<std::unordered_map<std::string, double>, kMaxN> w;
    std::array<double, kMaxN> norm{};
    double length = 0.0;
  };
  auto to_vec = [&](const NgramCounts& counts) {
    Vec v;
    for (int n = 0; n < kMaxN; ++n) {
      for (const auto& [gram, tf] : counts[n]) {
        auto it = df.find(gram);
        const double d = std::log(std::max(1.0, it == df.end() ? 0.0 : it->second));
        const double x = static_cast<double>(tf) * (log_n - d);
        v.w[n][gram] = x;
        v.norm[n] += x * x;
        // The toolkit's length term counts bigrams (its n == 1 slot).
        if (n == 1) v.length += tf;
      }
      v.norm[n] = std::sqrt(v.norm[n]);
    }
    return v;
  };

  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Vec hyp = to_vec(cand_counts[i]);
    const Vec ref = to_vec(ref_counts[i]);
    const double delta = hyp.length - ref.length;
    const double penalty = std::exp(-(delta * delta) / (2 * kSigma * kSigma));
    double total = 0.0;
    for (int n = 0; n < kMaxN; ++n) {
      double val = 0.0;
      for (const auto& [gram, h] : hyp.w[n]) {
        auto it = ref.w[n].find(gram);
        const double r = it == ref.w[n].end() ? 0.0 : it->second;
        val += std::min(h, r) * r;
      }
      if (hyp.norm[n] != 0.0 && ref.norm[n] != 0.0) val /= hyp.norm[n] * ref.norm[n];
      total += val * penalty;
    }
    scores.push_back(total / kMaxN * 10.0);
  }
  return scores;
}

double cider_tokenized(std::span<const std::string> candidates,
                       std::span<const std::string> references) {
  const auto s = cider_scores_tokenized(candidates, references);
  double sum = 0.0;
  for (double x : s) sum += x;
  return sum / static_cast<double>(s.size());
}

double bleu4(std::span<const std::string> candidates,
             std::span<const std::string> references) {
  check_corpus(candidates.size(), references.size());
  return bleu4_tokenized(normalize_all(candidates), normalize_all(references));
}

double rouge_l(std::span<const std::string> candidates,
               std::span<const std::string> references) {
  check_corpus(candidates.size(), references.size());
  return rouge_l_tokenized(normalize_all(candidates), normalize_all(references));
}

double cider(std::span<const std::string> candidates,
             std::span<const std::string> references) {
  check_corpus(candidates.size(), references.size());
  return cider_tokenized(normalize_all(candidates), normalize_all(references));
}

CaptionScores score_captions(std::span<const std::string> candidates,
                             std::span<const std::string> references) {
  check_corpus(candidates.size(), references.size());
  const auto c = normalize_all(candidates);
  const auto r = normalize_all(references);
  return {bleu4_tokenized(c, r), rouge_l_tokenized(c, r), cider_tokenized(c, r)};
}

}  // namespace newscap::metrics
