#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace pretrec {

// xoshiro256** seeded through splitmix64. Every draw helper below is implemented here rather
// than through <random> distributions, whose output is implementation-defined, so a seed yields
// the same sequence on every platform and standard library.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }

  // Independent substream keyed by a label, e.g. rng.split("split") or rng.split(7).
  // Does not advance this stream.
  RngStream split(std::uint64_t key) const;
  RngStream split(std::string_view key) const;

  std::uint64_t next_u64() noexcept;
  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  // Uniform integer on [0, n), n > 0, unbiased (rejection sampling).
  std::size_t uniform_index(std::size_t n) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }
  // Standard normal via Box-Muller (no cached second variate).
  double normal(double mean = 0.0, double stddev = 1.0) noexcept;

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }
  template <typename T>
  void shuffle(std::vector<T>& items) noexcept {
    shuffle(std::span<T>(items));
  }

  // k distinct values from [0, n) in draw order; k is clamped to n.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace pretrec
