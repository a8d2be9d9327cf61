#include <doctest.h>

#include "exldr/baselines.hpp"
#include "exldr/data.hpp"
#include "exldr/error.hpp"
#include "oracles.hpp"

using namespace exldr;

TEST_CASE("ols examples and singular design") {
  const Vector v = Vector::LinSpaced(5, 1.0, 5.0);
  CHECK((ols_fit(Matrix::Identity(5, 5), v).w_hat - v).norm() < 1e-14);

  std::mt19937_64 gen(50);
  const Matrix X = oracle::random_matrix(gen, 80, 6);
  const Vector w = oracle::random_vector(gen, 6);
  CHECK((ols_fit(X, X * w).w_hat - w).norm() < 1e-10);

  Matrix rank_deficient = X;
  rank_deficient.col(5) = 2.0 * rank_deficient.col(0);
  try {
    ols_fit(rank_deficient, X * w);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSingularDesign);
  }
}

TEST_CASE("ols and ridge agree with the elimination oracle") {
  std::mt19937_64 gen(51);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(gen() % 10);
    const Matrix X = oracle::random_matrix(gen, 40, d);
    const Vector y = oracle::random_vector(gen, 40);
    const Matrix gram = X.transpose() * X;
    const Vector ref = oracle::gauss_solve(gram, X.transpose() * y);
    CHECK((ols_fit(X, y).w_hat - ref).norm() <= 1e-8 * ref.norm());
    Matrix shifted = gram;
    shifted.diagonal().array() += 2.5;
    const Vector rref = oracle::gauss_solve(shifted, X.transpose() * y);
    CHECK((ridge_fit(X, y, 2.5).w_hat - rref).norm() <= 1e-8 * rref.norm());
  }
}

TEST_CASE("ridge limits") {
  std::mt19937_64 gen(52);
  const Matrix X = oracle::random_matrix(gen, 60, 4);
  const Vector y = oracle::random_vector(gen, 60);
  CHECK((ridge_fit(X, y, 1e-12).w_hat - ols_fit(X, y).w_hat).norm() < 1e-9);
  double last = 1e300;
  for (double lambda : {0.1, 1.0, 10.0, 1e3, 1e6, 1e9}) {
    const double norm = ridge_fit(X, y, lambda).w_hat.norm();
    CHECK(norm < last);
    last = norm;
  }
  CHECK(last < 1e-6);
  // Ridge stays well defined on rank-deficient designs.
  Matrix rd = X;
  rd.col(3) = rd.col(2);
  CHECK(ridge_fit(rd, y, 1.0).w_hat.allFinite());
}

TEST_CASE("huber coincides with ols when no residual exceeds delta") {
  std::mt19937_64 gen(53);
  const Matrix X = oracle::random_matrix(gen, 100, 3);
  const Vector y = X * oracle::random_vector(gen, 3) + 0.01 * oracle::random_vector(gen, 100);
  HuberOptions opts;
  opts.delta = 10.0;
  CHECK((huber_fit(X, y, opts).w_hat - ols_fit(X, y).w_hat).norm() < 1e-12);
}

TEST_CASE("huber with one gross outlier matches the closed-form minimizer") {
  // Clean rows fit exactly; the outlier sits in the linear part of the loss,
  // so the minimizer solves X_c'X_c (w - w_c) = delta * sign * x_out.
  std::mt19937_64 gen(54);
  Matrix X = oracle::random_matrix(gen, 50, 2);
  const Vector w(Vector::LinSpaced(2, 1.0, -1.0));
  Vector y = X * w;
  y(17) += 1000.0;
  HuberOptions opts;
  opts.delta = 1.0;
  opts.max_iter = 500;
  opts.tol = 1e-14;
  const Vector fit = huber_fit(X, y, opts).w_hat;

  Matrix Xc(49, 2);
  for (Eigen::Index i = 0, k = 0; i < 50; ++i)
    if (i != 17) Xc.row(k++) = X.row(i);
  const Vector offset = oracle::gauss_solve(Xc.transpose() * Xc, X.row(17).transpose());
  const Vector expected = w + offset;
  CHECK((fit - expected).norm() < 1e-6);
  MESSAGE("distance to outlier-free OLS: " << (fit - w).norm());
  const Vector ols = ols_fit(X, y).w_hat;
  CHECK((fit - w).norm() < 0.01 * (ols - w).norm());
}

TEST_CASE("huber IRLS objective is non-increasing") {
  SynthConfig cfg;
  cfg.n = 500;
  cfg.d = 5;
  const Dataset d = gen_synthetic(cfg);
  HuberOptions opts;
  opts.delta = 0.5;
  double last = 1e300;
  for (std::size_t iters = 1; iters <= 25; ++iters) {
    opts.max_iter = iters;
    const double obj = huber_objective(d.X, d.y, huber_fit(d.X, d.y, opts).w_hat, opts.delta);
    CHECK(obj <= last + 1e-9 * std::abs(last));
    last = obj;
  }
  CHECK(mad_scale(Vector::LinSpaced(5, 1.0, 5.0)) == doctest::Approx(1.4826));
}

TEST_CASE("ransac examples") {
  std::mt19937_64 gen(55);
  const Matrix X = oracle::random_matrix(gen, 100, 3);
  const Vector w = oracle::random_vector(gen, 3);
  RansacOptions opts;
  opts.n_trials = 1;
  opts.residual_threshold = 1e-6;
  CHECK((ransac_fit(X, X * w, opts).w_hat - w).norm() < 1e-9);

  Matrix line(200, 2);
  Vector y(200);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    line(i, 0) = 1.0;
    line(i, 1) = u(gen);
    y(i) = i < 120 ? 2.0 - 0.5 * line(i, 1) : 50.0 + u(gen) * 10.0;
  }
  opts.n_trials = 100;
  opts.residual_threshold = 1e-3;
  opts.seed = 3;
  const auto fit = ransac_fit(line, y, opts);
  Vector truth(2);
  truth << 2.0, -0.5;
  CHECK((fit.w_hat - truth).norm() < 1e-6);
  CHECK(ransac_fit(line, y, opts).w_hat == fit.w_hat);
}

TEST_CASE("ransac consensus failure") {
  std::mt19937_64 gen(56);
  const Matrix X = oracle::random_matrix(gen, 30, 3);
  const Vector y = oracle::random_vector(gen, 30);
  RansacOptions opts;
  opts.min_samples = 10;
  opts.residual_threshold = 1e-12;
  opts.n_trials = 5;
  try {
    ransac_fit(X, y, opts);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConsensusFailure);
  }
}
