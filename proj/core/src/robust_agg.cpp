#include "exldr/robust_agg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "exldr/error.hpp"

namespace exldr {
namespace {

template <typename T>
void check_shapes(std::span<const T> items) {
  require(!items.empty(), "median of an empty list");
  for (const auto& item : items) {
    require(item.rows() == items.front().rows() && item.cols() == items.front().cols(),
            "block means differ in shape");
  }
}

// Entrywise median over a list of equally shaped dense objects.
template <typename T>
T entrywise_median(std::span<const T> items) {
  check_shapes(items);
  T out(items.front().rows(), items.front().cols());
  std::vector<double> column(items.size());
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    for (std::size_t m = 0; m < items.size(); ++m) column[m] = items[m](k);
    out(k) = median_inplace(column);
  }
  return out;
}

Vector flatten(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unflatten(const Vector& v, Eigen::Index rows) {
  return Eigen::Map<const Matrix>(v.data(), rows, v.size() / rows);
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

BlockPartition partition_blocks(std::size_t item_count, std::size_t block_size,
                                const RngLabel& label, std::uint64_t round) {
  require(block_size >= 1, "block size must be positive");
  if (item_count == 0) fail(ErrorCode::kAggregationImpossible, "no active items to partition");
  std::vector<std::size_t> order(item_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng rng = CounterRng::keyed(label, Stream::kPartition, round);
  shuffle(std::span<std::size_t>(order), rng);

  BlockPartition partition;
  partition.block_size = block_size;
  for (std::size_t start = 0; start < item_count; start += block_size) {
    const std::size_t stop = std::min(item_count, start + block_size);
    partition.blocks.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                                  order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return partition;
}

double median_inplace(std::span<double> values) {
  require(!values.empty(), "median of an empty list");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                   values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(),
                                         values.begin() + static_cast<std::ptrdiff_t>(mid));
  return lower + 0.5 * (upper - lower);
}

Vector mom_median(std::span<const Vector> block_means) {
  return entrywise_median(block_means);
}

Matrix mom_median(std::span<const Matrix> block_means) {
  return symmetrized(entrywise_median(block_means));
}

double sum_of_distances(const Vector& q, std::span<const Vector> points) {
  double total = 0.0;
  for (const auto& p : points) total += (p - q).norm();
  return total;
}

Vector geometric_median(std::span<const Vector> points, const GeometricMedianOptions& options) {
  check_shapes(points);
  if (points.size() == 1) return points.front();

  const Eigen::Index dim = points.front().size();
  Vector y = Vector::Zero(dim);
  for (const auto& p : points) y += p;
  y /= static_cast<double>(points.size());

  double spread = 0.0;
  for (const auto& p : points) spread = std::max(spread, (p - y).norm());
  if (spread == 0.0) return y;
  const double coincide = options.tol * spread;

  Vector best = y;
  double best_objective = sum_of_distances(y, points);
  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    Vector weighted = Vector::Zero(dim);
    Vector pull = Vector::Zero(dim);
    double weight_sum = 0.0;
    std::size_t anchored = 0;
    for (const auto& p : points) {
      const double dist = (p - y).norm();
      if (dist <= coincide) {
        ++anchored;
        continue;
      }
      weighted += p / dist;
      pull += (p - y) / dist;
      weight_sum += 1.0 / dist;
    }
    if (weight_sum == 0.0) break;  // every point coincides with y
    Vector next = weighted / weight_sum;
    if (anchored > 0) {
      const double r = pull.norm();
      const double eta = static_cast<double>(anchored);
      if (r <= eta) break;  // y is the optimum
      const double keep = eta / r;
      next = (1.0 - keep) * next + keep * y;
    }
    const double step = (next - y).norm();
    const double objective = sum_of_distances(next, points);
    if (objective > best_objective) break;
    best = next;
    best_objective = objective;
    y = std::move(next);
    if (step < options.tol * spread) break;
  }
  return best;
}

RobustMoments robust_aggregate(std::span<const BucketStats> bucket_stats,
                               const AggregationConfig& cfg, const RngLabel& label,
                               std::uint64_t round) {
  if (bucket_stats.empty()) {
    fail(ErrorCode::kAggregationImpossible, "no bucket statistics to aggregate");
  }
  const Eigen::Index d = bucket_stats.front().g.size();
  for (const auto& s : bucket_stats) {
    require(s.count > 0, "empty bucket passed to aggregation");
    require(s.g.size() == d && s.H.rows() == d && s.H.cols() == d,
            "bucket statistics differ in dimension");
  }
  const auto partition = partition_blocks(bucket_stats.size(), cfg.block_size, label, round);

  std::vector<Matrix> h_means;
  std::vector<Vector> g_means;
  h_means.reserve(partition.blocks.size());
  g_means.reserve(partition.blocks.size());
  for (const auto& block : partition.blocks) {
    Matrix h = Matrix::Zero(d, d);
    Vector g = Vector::Zero(d);
    for (std::size_t idx : block) {
      h += bucket_stats[idx].H;
      g += bucket_stats[idx].g;
    }
    const double inv = 1.0 / static_cast<double>(block.size());
    h_means.push_back(h * inv);
    g_means.push_back(g * inv);
  }

  RobustMoments out;
  out.block_count = partition.blocks.size();
  if (cfg.mode == AggregationMode::kMedianOfMeans) {
    out.sigma_hat = mom_median(std::span<const Matrix>(h_means));
    out.g_hat = mom_median(std::span<const Vector>(g_means));
  } else {
    std::vector<Vector> flat;
    flat.reserve(h_means.size());
    for (const auto& h : h_means) flat.push_back(flatten(h));
    out.sigma_hat = symmetrized(unflatten(geometric_median(flat, cfg.geometric), d));
    out.g_hat = geometric_median(g_means, cfg.geometric);
  }
  return out;
}

Matrix robust_aggregate_matrices(std::span<const Matrix> matrices, const AggregationConfig& cfg,
                                 const RngLabel& label, std::uint64_t round) {
  if (matrices.empty()) fail(ErrorCode::kAggregationImpossible, "no matrices to aggregate");
  check_shapes(matrices);
  const auto partition = partition_blocks(matrices.size(), cfg.block_size, label, round);
  const Eigen::Index rows = matrices.front().rows();
  const Eigen::Index cols = matrices.front().cols();
  std::vector<Matrix> means;
  means.reserve(partition.blocks.size());
  for (const auto& block : partition.blocks) {
    Matrix sum = Matrix::Zero(rows, cols);
    for (std::size_t idx : block) sum += matrices[idx];
    means.push_back(sum / static_cast<double>(block.size()));
  }
  if (cfg.mode == AggregationMode::kMedianOfMeans) return mom_median(std::span<const Matrix>(means));
  std::vector<Vector> flat;
  flat.reserve(means.size());
  for (const auto& m : means) flat.push_back(flatten(m));
  return symmetrized(unflatten(geometric_median(flat, cfg.geometric), rows));
}

}  // namespace exldr
