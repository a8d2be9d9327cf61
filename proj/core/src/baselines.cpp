#include "exldr/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Cholesky>

#include "exldr/error.hpp"
#include "exldr/rng.hpp"
#include "exldr/robust_agg.hpp"

namespace exldr {
namespace {

void check_design(const Matrix& X, const Vector& y) {
  require(X.rows() == y.size(), "design and response row counts differ");
  require(X.rows() >= X.cols() && X.cols() >= 1, "need n >= d >= 1");
}

Vector spd_solve(const Matrix& gram, const Vector& rhs) {
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) fail(ErrorCode::kSingularDesign, "design is rank deficient");
  // Cholesky succeeds on numerically singular Gram matrices too; reject a
  // factor whose pivots collapse relative to the largest one.
  const Vector diag = llt.matrixLLT().diagonal();
  if (!(diag.minCoeff() > 1e-7 * diag.maxCoeff())) {
    fail(ErrorCode::kSingularDesign, "design is rank deficient");
  }
  return llt.solve(rhs);
}

Vector weighted_ls(const Matrix& X, const Vector& y, const Vector& weights) {
  const Matrix wx = X.array().colwise() * weights.array();
  Matrix gram = X.transpose() * wx;
  gram = 0.5 * (gram + gram.transpose()).eval();
  return spd_solve(gram, wx.transpose() * y);
}

Vector ols_solution(const Matrix& X, const Vector& y) {
  Matrix gram = X.transpose() * X;
  gram = 0.5 * (gram + gram.transpose()).eval();
  return spd_solve(gram, X.transpose() * y);
}

}  // namespace

BaselineFit ols_fit(const Matrix& X, const Vector& y) {
  check_design(X, y);
  return {ols_solution(X, y), "ols", 1};
}

BaselineFit ridge_fit(const Matrix& X, const Vector& y, double lambda) {
  require(X.rows() == y.size(), "design and response row counts differ");
  require(lambda >= 0.0, "ridge penalty must be non-negative");
  Matrix gram = X.transpose() * X;
  gram = 0.5 * (gram + gram.transpose()).eval();
  gram.diagonal().array() += lambda;
  return {spd_solve(gram, X.transpose() * y), "ridge", 1};
}

double mad_scale(const Vector& residuals) {
  require(residuals.size() >= 1, "MAD of an empty vector");
  std::vector<double> values(residuals.data(), residuals.data() + residuals.size());
  const double med = median_inplace(values);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = std::abs(residuals(static_cast<Eigen::Index>(i)) - med);
  return 1.482602218505602 * median_inplace(values);
}

double huber_objective(const Matrix& X, const Vector& y, const Vector& w, double delta) {
  const Vector r = y - X * w;
  double total = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double a = std::abs(r(i));
    total += a <= delta ? 0.5 * a * a : delta * (a - 0.5 * delta);
  }
  return total;
}

BaselineFit huber_fit(const Matrix& X, const Vector& y, const HuberOptions& options) {
  check_design(X, y);
  require(options.max_iter >= 1, "Huber needs at least one iteration");
  Vector w = ols_solution(X, y);
  double delta = options.delta;
  if (delta <= 0.0) {
    delta = 1.35 * mad_scale(y - X * w);
    if (!(delta > 0.0)) delta = 1.35;  // exact fit on more than half the rows
  }

  BaselineFit fit{w, "huber", 0};
  Vector weights(X.rows());
  for (std::size_t iter = 1; iter <= options.max_iter; ++iter) {
    const Vector r = y - X * fit.w_hat;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const double a = std::abs(r(i));
      weights(i) = a <= delta ? 1.0 : delta / a;
    }
    Vector next = weighted_ls(X, y, weights);
    const double step = (next - fit.w_hat).norm();
    const double scale = 1.0 + fit.w_hat.norm();
    fit.w_hat = std::move(next);
    fit.iterations = iter;
    if (step < options.tol * scale) break;
  }
  return fit;
}

BaselineFit ransac_fit(const Matrix& X, const Vector& y, const RansacOptions& options) {
  check_design(X, y);
  const auto n = static_cast<std::size_t>(X.rows());
  const std::size_t min_samples =
      options.min_samples == 0 ? static_cast<std::size_t>(X.cols()) : options.min_samples;
  require(min_samples >= static_cast<std::size_t>(X.cols()), "min_samples must be at least d");
  require(min_samples <= n, "min_samples exceeds the row count");
  require(options.n_trials >= 1, "RANSAC needs at least one trial");

  double threshold = options.residual_threshold;
  if (threshold <= 0.0) threshold = 2.5 * mad_scale(y - X * ols_solution(X, y));

  std::vector<std::size_t> rows(n);
  std::vector<std::size_t> best_consensus;
  std::vector<std::size_t> consensus;
  Matrix Xs(static_cast<Eigen::Index>(min_samples), X.cols());
  Vector ys(static_cast<Eigen::Index>(min_samples));
  for (std::size_t trial = 0; trial < options.n_trials; ++trial) {
    CounterRng rng = CounterRng::keyed({options.seed, 0, 0}, Stream::kRansac, trial);
    // Partial Fisher-Yates for the minimal sample.
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    for (std::size_t k = 0; k < min_samples; ++k) {
      std::swap(rows[k], rows[k + rng.uniform_below(n - k)]);
      Xs.row(static_cast<Eigen::Index>(k)) = X.row(static_cast<Eigen::Index>(rows[k]));
      ys(static_cast<Eigen::Index>(k)) = y(static_cast<Eigen::Index>(rows[k]));
    }
    Vector w;
    try {
      w = ols_solution(Xs, ys);
    } catch (const Error&) {
      continue;  // degenerate minimal sample
    }
    const Vector r = (y - X * w).cwiseAbs();
    consensus.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (r(static_cast<Eigen::Index>(i)) <= threshold) consensus.push_back(i);
    }
    if (consensus.size() > best_consensus.size()) best_consensus = consensus;
  }
  if (best_consensus.size() < min_samples) {
    fail(ErrorCode::kConsensusFailure, "no RANSAC trial reached a consensus of min_samples rows");
  }
  Matrix Xc(static_cast<Eigen::Index>(best_consensus.size()), X.cols());
  Vector yc(static_cast<Eigen::Index>(best_consensus.size()));
  for (std::size_t k = 0; k < best_consensus.size(); ++k) {
    Xc.row(static_cast<Eigen::Index>(k)) = X.row(static_cast<Eigen::Index>(best_consensus[k]));
    yc(static_cast<Eigen::Index>(k)) = y(static_cast<Eigen::Index>(best_consensus[k]));
  }
  return {ols_solution(Xc, yc), "ransac", options.n_trials};
}

}  // namespace exldr
