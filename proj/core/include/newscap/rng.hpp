#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace newscap {

// FNV-1a, 64 bit. Stable across platforms and runs.
std::uint64_t stable_hash(std::string_view s) noexcept;

// Derives an independent stream seed for `key` (typically a doc_id), so a
// document's draws do not depend on processing order or thread count.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) noexcept;

// mt19937_64 plus bias-free bounded draws. std::uniform_int_distribution
// is implementation-defined, so it is deliberately not used here.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n); n must be > 0.
  std::uint64_t uniform_below(std::uint64_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

  // k distinct indices from [0, n), in draw order. k is clamped to n.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace newscap
