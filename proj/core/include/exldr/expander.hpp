#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exldr/rng.hpp"
#include "exldr/types.hpp"

namespace exldr {

/// One repetition's left-regular signed bipartite graph. Left vertex i is
/// adjacent to `degree()` distinct buckets, each edge carrying a sign.
class ExpanderSketch {
 public:
  ExpanderSketch() = default;

  /// Samples each left vertex's bucket set as a uniform `degree`-subset of
  /// [0, n_buckets) with independent Rademacher signs. The draw for vertex i
  /// depends only on (label, i), so regeneration is order-independent.
  static ExpanderSketch sample(std::size_t n_left, std::size_t n_buckets,
                               std::size_t degree, const RngLabel& label);

  /// Builds a graph from explicit adjacency; used for hand-made fixtures.
  static ExpanderSketch from_adjacency(
      std::size_t n_buckets, const std::vector<std::vector<std::uint32_t>>& adjacency,
      const std::vector<std::vector<std::int8_t>>& signs = {});

  std::size_t n_left() const noexcept { return n_left_; }
  std::size_t n_buckets() const noexcept { return n_buckets_; }
  std::size_t degree() const noexcept { return degree_; }
  std::size_t edge_count() const noexcept { return adjacency_.size(); }
  const RngLabel& label() const noexcept { return label_; }

  std::span<const std::uint32_t> buckets_of(std::size_t vertex) const {
    return {adjacency_.data() + vertex * degree_, degree_};
  }
  std::span<const std::int8_t> signs_of(std::size_t vertex) const {
    return {signs_.data() + vertex * degree_, degree_};
  }

  /// Text adjacency list, one line per left vertex: `i: b1+,b2-,...`.
  std::string dump() const;

  friend bool operator==(const ExpanderSketch&, const ExpanderSketch&) = default;

 private:
  std::size_t n_left_ = 0;
  std::size_t n_buckets_ = 0;
  std::size_t degree_ = 0;
  std::vector<std::uint32_t> adjacency_;
  std::vector<std::int8_t> signs_;
  RngLabel label_{};
};

ExpanderSketch sample_expander(std::size_t n_left, std::size_t n_buckets,
                               std::size_t degree, const RngLabel& label);

struct SubsetDiagnostics {
  std::size_t neighbor_count = 0;
  std::vector<std::uint32_t> unique_neighbor_buckets;
  std::size_t collision_excess = 0;
  std::vector<std::size_t> per_vertex_unique;  // aligned with the subset
  std::vector<std::size_t> bucket_loads;       // length n_buckets
};

/// Exact neighbor, unique-neighbor, collision and load counts for X.
SubsetDiagnostics subset_diagnostics(const ExpanderSketch& graph,
                                     std::span<const std::size_t> subset);

/// 1 - |N(X)| / (d_L |X|).
double expansion_loss(const ExpanderSketch& graph,
                      std::span<const std::size_t> subset);

/// The subsets `audit_expansion` inspects: sizes uniform in
/// [1, max_set_size], members uniform without replacement.
std::vector<IndexSet> sample_subsets(std::size_t n_left, std::size_t max_set_size,
                                     std::size_t trials, const RngLabel& label);

struct ExpansionAudit {
  double epsilon_hat = 0.0;
  std::size_t worst_subset_size = 0;
  std::size_t trials = 0;
};

/// One-sided empirical estimate of the lossless-expansion parameter:
/// the largest expansion loss over sampled subsets.
ExpansionAudit audit_expansion(const ExpanderSketch& graph,
                               std::size_t max_set_size, std::size_t trials,
                               const RngLabel& label);

struct ContaminationCensus {
  std::size_t unique_bucket_count = 0;
  /// Fraction of U(inliers) holding at most `cap` outliers (1 when empty).
  double fraction_good = 1.0;
  /// Mean outlier count over U(inliers) (0 when empty).
  double mean_outliers = 0.0;
  /// Fraction of inliers owning at least one good unique bucket.
  double inlier_coverage = 0.0;
};

ContaminationCensus light_contamination_census(const ExpanderSketch& graph,
                                               std::span<const std::size_t> inliers,
                                               std::span<const std::size_t> outliers,
                                               std::size_t cap);

}  // namespace exldr
