#include "exldr/rng.hpp"

#include <cmath>

#include "exldr/error.hpp"

namespace exldr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParameter: return "parameter";
    case ErrorCode::kEmptyBucket: return "empty_bucket";
    case ErrorCode::kAggregationImpossible: return "aggregation_impossible";
    case ErrorCode::kIndefiniteMoments: return "indefinite_moments";
    case ErrorCode::kDegenerateState: return "degenerate_state";
    case ErrorCode::kSingularDesign: return "singular_design";
    case ErrorCode::kConsensusFailure: return "consensus_failure";
    case ErrorCode::kInsufficientRows: return "insufficient_rows";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
  }
  return "unknown";
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_label(const RngLabel& label, Stream stream,
                         std::uint64_t counter) noexcept {
  std::uint64_t h = mix64(label.master_seed ^ 0x6a09e667f3bcc908ULL);
  h = mix64(h ^ label.seed_index);
  h = mix64(h ^ (label.repetition_index + 0x3c6ef372fe94f82bULL));
  h = mix64(h ^ static_cast<std::uint64_t>(stream));
  return mix64(h ^ counter);
}

CounterRng::result_type CounterRng::operator()() noexcept {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

__extension__ typedef unsigned __int128 u128;

// Lemire's nearly-divisionless bounded draw.
std::uint64_t CounterRng::uniform_below(std::uint64_t bound) noexcept {
  u128 m = static_cast<u128>((*this)()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<u128>((*this)()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double CounterRng::uniform01() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

}  // namespace exldr
