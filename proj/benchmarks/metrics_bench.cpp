#include <benchmark/benchmark.h>

#include "newscap/metrics.hpp"
#include "synthetic.hpp"

namespace {

struct Captions {
  std::vector<std::string> candidates;
  std::vector<std::string> references;
};

Captions captions(std::size_t n) {
  const auto syn = newscap::testing::make_synthetic_corpus(n, 3);
  Captions c;
  for (const auto& d : syn.docs) {
    c.references.push_back(d.caption);
    c.candidates.push_back(d.sentences.front().text);
  }
  return c;
}

void BM_PtbNormalize(benchmark::State& state) {
  const auto c = captions(64);
  for (auto _ : state) {
    for (const auto& s : c.references) benchmark::DoNotOptimize(newscap::metrics::ptb_normalize(s));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.references.size()));
}
BENCHMARK(BM_PtbNormalize);

void BM_ScoreCaptions(benchmark::State& state) {
  const auto c = captions(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(newscap::metrics::score_captions(c.candidates, c.references));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ScoreCaptions)->Arg(50)->Arg(500)->Arg(2000);

}  // namespace
