#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "exldr/rng.hpp"
#include "exldr/sketch.hpp"
#include "exldr/types.hpp"

namespace exldr {

/// Disjoint blocks of positions into an item list.
struct BlockPartition {
  std::vector<std::vector<std::size_t>> blocks;
  std::size_t block_size = 0;
};

/// Random permutation of [0, item_count) cut into consecutive chunks of
/// `block_size`; the last chunk holds the remainder.
BlockPartition partition_blocks(std::size_t item_count, std::size_t block_size,
                                const RngLabel& label, std::uint64_t round = 0);

/// Median with midpoint interpolation for even counts. Reorders `values`.
double median_inplace(std::span<double> values);

Vector mom_median(std::span<const Vector> block_means);
/// Entrywise median, symmetrized afterwards.
Matrix mom_median(std::span<const Matrix> block_means);

struct GeometricMedianOptions {
  double tol = 1e-9;  // relative to the spread of the points
  std::size_t max_iter = 200;
};

/// Weiszfeld iteration with the Vardi-Zhang correction at data points.
/// Returns the iterate with the smallest objective seen.
Vector geometric_median(std::span<const Vector> points,
                        const GeometricMedianOptions& options = {});

/// Sum of Euclidean distances from q to the points.
double sum_of_distances(const Vector& q, std::span<const Vector> points);

enum class AggregationMode { kMedianOfMeans, kGeometricMedian };

struct AggregationConfig {
  std::size_t block_size = 16;
  AggregationMode mode = AggregationMode::kMedianOfMeans;
  GeometricMedianOptions geometric{};
};

struct RobustMoments {
  Matrix sigma_hat;
  Vector g_hat;
  std::size_t block_count = 0;
};

/// Block means of the bucket statistics reduced by `cfg.mode`.
RobustMoments robust_aggregate(std::span<const BucketStats> bucket_stats,
                               const AggregationConfig& cfg, const RngLabel& label,
                               std::uint64_t round = 0);

/// Same reduction for a list of symmetric matrices (residual covariances).
Matrix robust_aggregate_matrices(std::span<const Matrix> matrices,
                                 const AggregationConfig& cfg, const RngLabel& label,
                                 std::uint64_t round = 0);

}  // namespace exldr
