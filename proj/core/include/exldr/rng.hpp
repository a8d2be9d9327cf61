#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace exldr {

/// Identifies one independent stream of algorithm randomness. Graphs for
/// repetition t of pipeline seed s under master seed m are keyed by (m, s, t).
struct RngLabel {
  std::uint64_t master_seed = 0;
  std::uint64_t seed_index = 0;
  std::uint64_t repetition_index = 0;

  friend bool operator==(const RngLabel&, const RngLabel&) = default;
};

/// Purpose tags keep streams derived from the same label disjoint.
enum class Stream : std::uint64_t {
  kGraph = 1,
  kPartition = 2,
  kEigenStart = 3,
  kAudit = 4,
  kData = 5,
  kRansac = 6,
  kMixture = 7,
  kExperiment = 8,
};

std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t hash_label(const RngLabel& label, Stream stream,
                         std::uint64_t counter) noexcept;

/// SplitMix64 stream whose starting state is a hash of (label, stream,
/// counter). Cheap to construct, so per-vertex generators are fine.
/// Distribution helpers are implemented here rather than taken from
/// <random> so that outputs are bit-identical across standard libraries.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : state_(key) {}

  static CounterRng keyed(const RngLabel& label, Stream stream,
                          std::uint64_t counter = 0) noexcept {
    return CounterRng(hash_label(label, stream, counter));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept;
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept;
  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform01();
  }
  /// Standard normal via the Marsaglia polar method.
  double normal() noexcept;
  /// Rademacher sign.
  int sign() noexcept { return ((*this)() >> 63) ? 1 : -1; }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

template <typename T>
void shuffle(std::span<T> items, CounterRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = rng.uniform_below(i);
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace exldr
