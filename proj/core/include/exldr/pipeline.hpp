#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exldr/numkit.hpp"
#include "exldr/robust_agg.hpp"
#include "exldr/types.hpp"

namespace exldr {

/// Estimator hyperparameters. Defaults are the synthetic-experiment
/// configuration: B=1000, d_L=2, r=8, R=10, T=7, lambda=1e-3, eta=0.10,
/// rho=0.50 and clustering radius 0.
struct PipelineConfig {
  double alpha = 0.3;
  std::size_t n_buckets = 1000;
  std::size_t repetitions = 8;
  std::size_t degree = 2;
  std::size_t filter_rounds = 7;
  std::size_t seeds = 10;
  std::size_t block_size = 16;
  double lambda = 1e-3;
  double eta = 0.10;
  double rho = 0.50;
  double delta_radius = 0.0;
  AggregationMode aggregation_mode = AggregationMode::kMedianOfMeans;
  std::uint64_t master_seed = 0;
  /// Worker threads for run_list; results do not depend on this.
  std::size_t threads = 1;
  PowerIterationOptions power{};
  GeometricMedianOptions geometric{};

  void validate() const;
  AggregationConfig aggregation() const {
    return {block_size, aggregation_mode, geometric};
  }
};

enum class StopReason { kThreshold, kRoundLimit };

struct FilterRound {
  std::size_t active_buckets = 0;
  double top_eigenvalue = 0.0;
  double target_variance = 0.0;
};

struct Candidate {
  Vector ell_hat;
  std::size_t seed_index = 0;
  std::size_t rounds_used = 0;  // prune rounds executed
  double final_top_eigenvalue = 0.0;
  std::size_t active_bucket_count = 0;
  double lambda_used = 0.0;
  StopReason stop_reason = StopReason::kRoundLimit;
  std::vector<FilterRound> trace;
};

struct SeedFailure {
  std::size_t seed_index = 0;
  std::string message;
};

struct CandidateList {
  std::vector<Candidate> candidates;   // successful seeds, in seed order
  std::vector<SeedFailure> failures;
  std::vector<Vector> centers;
  std::vector<std::size_t> members;    // cluster index per candidate
};

/// Median over buckets of the Rayleigh score vᵀ C_b v.
double target_variance(std::span<const Matrix> bucket_residual_matrices, const Vector& v);

/// One pass of sketch, aggregate, solve and spectral filtering for a single
/// expander seed. Randomness is keyed by (master_seed, seed_index, ·).
Candidate run_seed(const Matrix& X, const Vector& y, const PipelineConfig& cfg,
                   std::size_t seed_index);

/// Runs seeds 1..R and clusters the candidates at radius delta_radius.
CandidateList run_list(const Matrix& X, const Vector& y, const PipelineConfig& cfg);

/// Center with the smallest mean squared prediction error on the
/// evaluation data. Evaluation plumbing only.
Vector select_best(const CandidateList& list, const Matrix& X_eval, const Vector& y_eval);

std::string_view to_string(StopReason reason);

}  // namespace exldr
