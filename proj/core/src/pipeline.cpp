#include "exldr/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <thread>

#include "exldr/error.hpp"
#include "exldr/expander.hpp"
#include "exldr/sketch.hpp"

namespace exldr {
namespace {

Vector solve_with_escalation(const RobustMoments& moments, double lambda, std::size_t n,
                             double& lambda_used) {
  try {
    lambda_used = lambda;
    return ridge_solve(moments.sigma_hat, moments.g_hat, lambda);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kIndefiniteMoments) throw;
  }
  lambda_used = std::max(lambda, moments.sigma_hat.norm() / std::sqrt(static_cast<double>(n)));
  return ridge_solve(moments.sigma_hat, moments.g_hat, lambda_used);
}

}  // namespace

void PipelineConfig::validate() const {
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  require(n_buckets >= 1 && repetitions >= 1 && degree >= 1 && seeds >= 1 && block_size >= 1,
          "pipeline counts must be positive");
  require(degree <= n_buckets, "degree must not exceed the bucket count");
  require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be non-negative");
  require(eta > 0.0 && std::isfinite(eta), "eta must be positive");
  require(rho > 0.0 && rho < 1.0, "rho must lie in (0, 1)");
  require(delta_radius >= 0.0, "clustering radius must be non-negative");
  require(threads >= 1, "thread count must be positive");
}

std::string_view to_string(StopReason reason) {
  return reason == StopReason::kThreshold ? "threshold" : "round_limit";
}

double target_variance(std::span<const Matrix> bucket_residual_matrices, const Vector& v) {
  require(!bucket_residual_matrices.empty(), "target variance needs at least one bucket");
  std::vector<double> scores;
  scores.reserve(bucket_residual_matrices.size());
  for (const auto& c : bucket_residual_matrices) {
    require(c.rows() == v.size() && c.cols() == v.size(), "residual matrix dimension mismatch");
    scores.push_back(v.dot(c * v));
  }
  return median_inplace(scores);
}

Candidate run_seed(const Matrix& X, const Vector& y, const PipelineConfig& cfg,
                   std::size_t seed_index) {
  cfg.validate();
  require(X.rows() == y.size(), "design and response row counts differ");
  require(X.rows() >= X.cols() && X.cols() >= 1, "need n >= d >= 1");
  const auto n = static_cast<std::size_t>(X.rows());

  std::vector<ExpanderSketch> graphs;
  graphs.reserve(cfg.repetitions);
  for (std::size_t t = 0; t < cfg.repetitions; ++t) {
    graphs.push_back(sample_expander(n, cfg.n_buckets, cfg.degree,
                                     {cfg.master_seed, seed_index, t}));
  }
  const BucketAssignment assignment = assign_buckets(X, y, graphs);

  std::vector<BucketKey> active = assignment.non_empty();
  std::vector<BucketStats> stats;
  stats.reserve(active.size());
  for (const auto& key : active) {
    stats.push_back(bucket_moments(X, y, assignment, key.repetition, key.bucket));
  }

  const AggregationConfig agg = cfg.aggregation();
  const RngLabel label{cfg.master_seed, seed_index, 0};
  Candidate candidate;
  candidate.seed_index = seed_index;

  std::vector<Matrix> residuals;
  std::vector<double> scores;
  std::vector<std::size_t> order;
  for (std::size_t round = 0;; ++round) {
    const RobustMoments moments = robust_aggregate(stats, agg, label, 2 * round);
    candidate.ell_hat = solve_with_escalation(moments, cfg.lambda, n, candidate.lambda_used);
    candidate.active_bucket_count = active.size();
    if (round == cfg.filter_rounds) {
      candidate.stop_reason = StopReason::kRoundLimit;
      break;
    }

    residuals.clear();
    residuals.reserve(active.size());
    for (const auto& key : active) {
      residuals.push_back(bucket_residual_matrix(X, y, assignment, key.repetition, key.bucket,
                                                 candidate.ell_hat));
    }
    const Matrix c_hat = robust_aggregate_matrices(residuals, agg, label, 2 * round + 1);
    const EigenPair top =
        top_eigenpair(c_hat, {cfg.master_seed, seed_index, round}, cfg.power);

    scores.resize(active.size());
    for (std::size_t k = 0; k < active.size(); ++k) {
      scores[k] = top.vector.dot(residuals[k] * top.vector);
    }
    std::vector<double> scratch(scores);
    const double target = median_inplace(scratch);
    candidate.final_top_eigenvalue = top.value;
    candidate.trace.push_back({active.size(), top.value, target});
    if (top.value <= (1.0 + cfg.eta) * target) {
      candidate.stop_reason = StopReason::kThreshold;
      break;
    }

    const auto prune = static_cast<std::size_t>(
        std::ceil(cfg.rho * static_cast<double>(active.size())));
    if (prune >= active.size()) {
      fail(ErrorCode::kDegenerateState, "spectral filtering would prune every bucket");
    }
    order.resize(active.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return active[a] < active[b];
    });
    std::vector<char> keep(active.size(), 1);
    for (std::size_t k = 0; k < prune; ++k) keep[order[k]] = 0;

    std::size_t write = 0;
    for (std::size_t k = 0; k < active.size(); ++k) {
      if (!keep[k]) continue;
      if (write != k) {
        active[write] = active[k];
        stats[write] = std::move(stats[k]);
      }
      ++write;
    }
    active.resize(write);
    stats.resize(write);
    ++candidate.rounds_used;
  }
  return candidate;
}

CandidateList run_list(const Matrix& X, const Vector& y, const PipelineConfig& cfg) {
  cfg.validate();
  std::vector<std::optional<Candidate>> results(cfg.seeds);
  std::vector<std::string> errors(cfg.seeds);
  std::vector<std::exception_ptr> first_error(cfg.seeds);

  auto work = [&](std::size_t s) {
    try {
      results[s] = run_seed(X, y, cfg, s + 1);
    } catch (const Error& e) {
      errors[s] = e.what();
      first_error[s] = std::current_exception();
    }
  };

  const std::size_t workers = std::min(cfg.threads, cfg.seeds);
  if (workers <= 1) {
    for (std::size_t s = 0; s < cfg.seeds; ++s) work(s);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t s = next++; s < cfg.seeds; s = next++) work(s);
      });
    }
  }

  CandidateList list;
  for (std::size_t s = 0; s < cfg.seeds; ++s) {
    if (results[s]) {
      list.candidates.push_back(std::move(*results[s]));
    } else {
      list.failures.push_back({s + 1, errors[s]});
    }
  }
  if (list.candidates.empty()) std::rethrow_exception(first_error.front());

  std::vector<Vector> points;
  points.reserve(list.candidates.size());
  for (const auto& c : list.candidates) points.push_back(c.ell_hat);
  Clustering clusters = single_linkage_clusters(points, cfg.delta_radius);
  list.centers = std::move(clusters.centers);
  list.members = std::move(clusters.assignment);
  return list;
}

Vector select_best(const CandidateList& list, const Matrix& X_eval, const Vector& y_eval) {
  require(!list.centers.empty(), "candidate list is empty");
  require(X_eval.rows() == y_eval.size() && X_eval.rows() >= 1, "evaluation data is malformed");
  std::size_t best = 0;
  double best_mse = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < list.centers.size(); ++c) {
    require(list.centers[c].size() == X_eval.cols(), "candidate dimension mismatch");
    const double mse = (X_eval * list.centers[c] - y_eval).squaredNorm() /
                       static_cast<double>(X_eval.rows());
    if (mse < best_mse) {
      best_mse = mse;
      best = c;
    }
  }
  return list.centers[best];
}

}  // namespace exldr
