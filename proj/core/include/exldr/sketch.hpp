#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "exldr/expander.hpp"
#include "exldr/types.hpp"

namespace exldr {

struct BucketKey {
  std::uint32_t repetition = 0;
  std::uint32_t bucket = 0;

  friend auto operator<=>(const BucketKey&, const BucketKey&) = default;
};

struct BucketEntry {
  std::uint32_t row = 0;
  std::int8_t sign = 1;
};

/// Row-to-bucket membership for all repetitions, stored CSR-style. Within a
/// bucket, entries are in ascending row order.
class BucketAssignment {
 public:
  BucketAssignment() = default;
  BucketAssignment(std::size_t repetitions, std::size_t buckets,
                   std::vector<std::size_t> offsets, std::vector<BucketEntry> entries);

  std::size_t repetition_count() const noexcept { return repetitions_; }
  std::size_t bucket_count() const noexcept { return buckets_; }
  std::size_t total_size() const noexcept { return entries_.size(); }

  std::span<const BucketEntry> members(std::size_t t, std::size_t b) const;
  std::span<const BucketEntry> members(const BucketKey& key) const {
    return members(key.repetition, key.bucket);
  }
  std::size_t count(std::size_t t, std::size_t b) const { return members(t, b).size(); }

  /// All (t, b) with at least one row, in (t, b) order.
  std::vector<BucketKey> non_empty() const;

 private:
  std::size_t repetitions_ = 0;
  std::size_t buckets_ = 0;
  std::vector<std::size_t> offsets_;  // repetitions_ * buckets_ + 1
  std::vector<BucketEntry> entries_;
};

/// Groups rows by (repetition, bucket) in O(n d_L r + r B).
BucketAssignment assign_buckets(const Matrix& X, const Vector& y,
                                std::span<const ExpanderSketch> graphs);

/// Count-normalized bucket second moments: H = mean x xᵀ, g = mean x y.
struct BucketStats {
  Matrix H;
  Vector g;
  std::size_t count = 0;
};

BucketStats bucket_moments(const Matrix& X, const Vector& y,
                           const BucketAssignment& assignment, std::size_t t,
                           std::size_t b);

/// mean over the bucket of r_i² x_i x_iᵀ with r_i = y_i - <x_i, ell_hat>.
Matrix bucket_residual_matrix(const Matrix& X, const Vector& y,
                              const BucketAssignment& assignment, std::size_t t,
                              std::size_t b, const Vector& ell_hat);

}  // namespace exldr
