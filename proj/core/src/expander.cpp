#include "exldr/expander.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

#include "exldr/error.hpp"

namespace exldr {
namespace {

// Partial Fisher-Yates over the virtual array [0, n), storing only the
// displaced slots. O(k^2) for k draws, which is fine for constant degree.
void draw_distinct(CounterRng& rng, std::size_t n, std::size_t k,
                   std::uint32_t* out) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> displaced;
  displaced.reserve(k);
  auto value_at = [&](std::uint64_t pos) {
    for (const auto& [p, v] : displaced) {
      if (p == pos) return v;
    }
    return pos;
  };
  auto assign = [&](std::uint64_t pos, std::uint64_t value) {
    for (auto& [p, v] : displaced) {
      if (p == pos) {
        v = value;
        return;
      }
    }
    displaced.emplace_back(pos, value);
  };
  for (std::size_t j = 0; j < k; ++j) {
    const std::uint64_t pick = j + rng.uniform_below(n - j);
    const std::uint64_t chosen = value_at(pick);
    assign(pick, value_at(j));
    out[j] = static_cast<std::uint32_t>(chosen);
  }
}

void check_subset(const ExpanderSketch& graph, std::span<const std::size_t> subset) {
  std::vector<bool> seen(graph.n_left(), false);
  for (std::size_t i : subset) {
    require(i < graph.n_left(), "subset index out of range");
    require(!seen[i], "subset contains a duplicate index");
    seen[i] = true;
  }
}

}  // namespace

ExpanderSketch ExpanderSketch::sample(std::size_t n_left, std::size_t n_buckets,
                                      std::size_t degree, const RngLabel& label) {
  require(n_left >= 1, "expander needs at least one left vertex");
  require(n_buckets >= 1, "expander needs at least one bucket");
  require(degree >= 1, "expander degree must be positive");
  require(degree <= n_buckets, "expander degree exceeds bucket count");
  require(n_buckets <= 0xffffffffULL, "bucket count exceeds 32-bit range");

  ExpanderSketch g;
  g.n_left_ = n_left;
  g.n_buckets_ = n_buckets;
  g.degree_ = degree;
  g.label_ = label;
  g.adjacency_.resize(n_left * degree);
  g.signs_.resize(n_left * degree);
  for (std::size_t i = 0; i < n_left; ++i) {
    CounterRng rng = CounterRng::keyed(label, Stream::kGraph, i);
    draw_distinct(rng, n_buckets, degree, g.adjacency_.data() + i * degree);
    for (std::size_t j = 0; j < degree; ++j) {
      g.signs_[i * degree + j] = static_cast<std::int8_t>(rng.sign());
    }
  }
  return g;
}

ExpanderSketch ExpanderSketch::from_adjacency(
    std::size_t n_buckets, const std::vector<std::vector<std::uint32_t>>& adjacency,
    const std::vector<std::vector<std::int8_t>>& signs) {
  require(!adjacency.empty(), "expander needs at least one left vertex");
  require(n_buckets >= 1, "expander needs at least one bucket");
  const std::size_t degree = adjacency.front().size();
  require(degree >= 1 && degree <= n_buckets, "invalid expander degree");
  require(signs.empty() || signs.size() == adjacency.size(), "sign list size mismatch");

  ExpanderSketch g;
  g.n_left_ = adjacency.size();
  g.n_buckets_ = n_buckets;
  g.degree_ = degree;
  g.adjacency_.reserve(g.n_left_ * degree);
  g.signs_.reserve(g.n_left_ * degree);
  for (std::size_t i = 0; i < adjacency.size(); ++i) {
    const auto& row = adjacency[i];
    require(row.size() == degree, "graph is not left-regular");
    std::vector<std::uint32_t> sorted(row);
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
            "vertex lists a bucket twice");
    for (std::size_t j = 0; j < degree; ++j) {
      require(row[j] < n_buckets, "bucket index out of range");
      g.adjacency_.push_back(row[j]);
      std::int8_t s = 1;
      if (!signs.empty()) {
        require(signs[i].size() == degree, "sign list size mismatch");
        s = signs[i][j];
        require(s == 1 || s == -1, "edge signs must be +1 or -1");
      }
      g.signs_.push_back(s);
    }
  }
  return g;
}

std::string ExpanderSketch::dump() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < n_left_; ++i) {
    out << i << ':';
    const auto buckets = buckets_of(i);
    const auto signs = signs_of(i);
    for (std::size_t j = 0; j < degree_; ++j) {
      out << (j == 0 ? " " : ",") << buckets[j] << (signs[j] > 0 ? '+' : '-');
    }
    out << '\n';
  }
  return out.str();
}

ExpanderSketch sample_expander(std::size_t n_left, std::size_t n_buckets,
                               std::size_t degree, const RngLabel& label) {
  return ExpanderSketch::sample(n_left, n_buckets, degree, label);
}

SubsetDiagnostics subset_diagnostics(const ExpanderSketch& graph,
                                     std::span<const std::size_t> subset) {
  check_subset(graph, subset);
  SubsetDiagnostics diag;
  diag.bucket_loads.assign(graph.n_buckets(), 0);
  for (std::size_t i : subset) {
    for (std::uint32_t b : graph.buckets_of(i)) ++diag.bucket_loads[b];
  }
  for (std::size_t b = 0; b < diag.bucket_loads.size(); ++b) {
    const std::size_t load = diag.bucket_loads[b];
    if (load == 0) continue;
    ++diag.neighbor_count;
    diag.collision_excess += load - 1;
    if (load == 1) diag.unique_neighbor_buckets.push_back(static_cast<std::uint32_t>(b));
  }
  diag.per_vertex_unique.reserve(subset.size());
  for (std::size_t i : subset) {
    std::size_t owned = 0;
    for (std::uint32_t b : graph.buckets_of(i)) owned += diag.bucket_loads[b] == 1;
    diag.per_vertex_unique.push_back(owned);
  }
  return diag;
}

double expansion_loss(const ExpanderSketch& graph, std::span<const std::size_t> subset) {
  require(!subset.empty(), "expansion loss needs a non-empty subset");
  const auto diag = subset_diagnostics(graph, subset);
  const double full = static_cast<double>(graph.degree() * subset.size());
  return 1.0 - static_cast<double>(diag.neighbor_count) / full;
}

std::vector<IndexSet> sample_subsets(std::size_t n_left, std::size_t max_set_size,
                                     std::size_t trials, const RngLabel& label) {
  require(max_set_size >= 1 && max_set_size <= n_left, "max_set_size must lie in [1, n_left]");
  require(trials >= 1, "audit needs at least one trial");
  std::vector<IndexSet> subsets;
  subsets.reserve(trials);
  std::vector<std::uint32_t> scratch;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    CounterRng rng = CounterRng::keyed(label, Stream::kAudit, trial);
    const std::size_t size = 1 + rng.uniform_below(max_set_size);
    scratch.resize(size);
    draw_distinct(rng, n_left, size, scratch.data());
    subsets.emplace_back(scratch.begin(), scratch.end());
  }
  return subsets;
}

ExpansionAudit audit_expansion(const ExpanderSketch& graph, std::size_t max_set_size,
                               std::size_t trials, const RngLabel& label) {
  ExpansionAudit audit;
  audit.trials = trials;
  for (const auto& subset : sample_subsets(graph.n_left(), max_set_size, trials, label)) {
    const double loss = expansion_loss(graph, subset);
    if (loss > audit.epsilon_hat || audit.worst_subset_size == 0) {
      audit.epsilon_hat = std::max(audit.epsilon_hat, loss);
      audit.worst_subset_size = subset.size();
    }
  }
  return audit;
}

ContaminationCensus light_contamination_census(const ExpanderSketch& graph,
                                               std::span<const std::size_t> inliers,
                                               std::span<const std::size_t> outliers,
                                               std::size_t cap) {
  check_subset(graph, inliers);
  check_subset(graph, outliers);
  std::vector<char> is_inlier(graph.n_left(), 0);
  for (std::size_t i : inliers) is_inlier[i] = 1;
  for (std::size_t i : outliers) require(!is_inlier[i], "inlier and outlier sets overlap");

  const auto diag = subset_diagnostics(graph, inliers);
  std::vector<std::size_t> outlier_load(graph.n_buckets(), 0);
  for (std::size_t i : outliers) {
    for (std::uint32_t b : graph.buckets_of(i)) ++outlier_load[b];
  }

  ContaminationCensus census;
  census.unique_bucket_count = diag.unique_neighbor_buckets.size();
  std::vector<char> good(graph.n_buckets(), 0);
  if (census.unique_bucket_count > 0) {
    std::size_t good_count = 0;
    std::size_t total = 0;
    for (std::uint32_t b : diag.unique_neighbor_buckets) {
      total += outlier_load[b];
      if (outlier_load[b] <= cap) {
        good[b] = 1;
        ++good_count;
      }
    }
    const auto u = static_cast<double>(census.unique_bucket_count);
    census.fraction_good = static_cast<double>(good_count) / u;
    census.mean_outliers = static_cast<double>(total) / u;
  }
  if (!inliers.empty()) {
    std::size_t covered = 0;
    for (std::size_t i : inliers) {
      const auto buckets = graph.buckets_of(i);
      covered += std::any_of(buckets.begin(), buckets.end(),
                             [&](std::uint32_t b) { return good[b] != 0; });
    }
    census.inlier_coverage = static_cast<double>(covered) / static_cast<double>(inliers.size());
  }
  return census;
}

}  // namespace exldr
