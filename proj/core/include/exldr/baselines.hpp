#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "exldr/types.hpp"

namespace exldr {

struct BaselineFit {
  Vector w_hat;
  std::string method;
  std::size_t iterations = 0;
};

/// Normal equations via Cholesky; rank deficiency raises kSingularDesign.
BaselineFit ols_fit(const Matrix& X, const Vector& y);

/// (XᵀX + lambda I) w = Xᵀy.
BaselineFit ridge_fit(const Matrix& X, const Vector& y, double lambda = 1.0);

/// 1.4826 * median |r - median r|.
double mad_scale(const Vector& residuals);

struct HuberOptions {
  /// Transition scale; non-positive means 1.35 x MAD scale of OLS residuals.
  double delta = 0.0;
  std::size_t max_iter = 100;
  double tol = 1e-8;
};

/// Iteratively reweighted least squares on the Huber loss with weights
/// min(1, delta / |r_i|).
BaselineFit huber_fit(const Matrix& X, const Vector& y, const HuberOptions& options = {});

/// Huber objective sum_i rho_delta(y_i - <x_i, w>).
double huber_objective(const Matrix& X, const Vector& y, const Vector& w, double delta);

struct RansacOptions {
  std::size_t min_samples = 0;      // 0 means d
  double residual_threshold = 0.0;  // non-positive means 2.5 x MAD of OLS residuals
  std::size_t n_trials = 100;
  std::uint64_t seed = 0;
};

/// Best-consensus RANSAC with a final OLS refit on the consensus set.
BaselineFit ransac_fit(const Matrix& X, const Vector& y, const RansacOptions& options = {});

}  // namespace exldr
