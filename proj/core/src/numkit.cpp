#include "exldr/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "exldr/error.hpp"

namespace exldr {
namespace {

void fix_sign(Vector& v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

Vector ridge_solve(const Matrix& sigma_hat, const Vector& g_hat, double lambda) {
  require(sigma_hat.rows() == sigma_hat.cols(), "moment matrix must be square");
  require(sigma_hat.rows() == g_hat.size(), "moment dimension mismatch");
  require(lambda >= 0.0 && std::isfinite(lambda), "ridge must be a finite non-negative scalar");
  require(all_finite(sigma_hat) && g_hat.allFinite(), "moments contain non-finite entries");

  Matrix shifted = sigma_hat;
  shifted.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::kIndefiniteMoments, "shifted moment matrix is not positive definite");
  }
  Vector x = llt.solve(g_hat);
  if (!x.allFinite()) fail(ErrorCode::kIndefiniteMoments, "ridge solve produced non-finite values");
  return x;
}

EigenPair top_eigenpair(const Matrix& m, const RngLabel& label,
                        const PowerIterationOptions& options) {
  require(m.rows() == m.cols() && m.rows() >= 1, "eigenpair needs a square matrix");
  require(all_finite(m), "matrix contains non-finite entries");
  const Eigen::Index d = m.rows();

  EigenPair out;
  const double scale = m.norm();
  if (scale == 0.0) {
    out.value = 0.0;
    out.vector = Vector::Unit(d, 0);
    out.converged = true;
    return out;
  }

  // A plain single-vector iteration stalls when the two largest magnitudes
  // are close (in particular lambda_max ~ -lambda_min). Iterating a block of
  // three vectors and extracting the Ritz pair resolves those pairs exactly.
  const Eigen::Index p = std::min<Eigen::Index>(d, 3);
  CounterRng rng = CounterRng::keyed(label, Stream::kEigenStart);
  Matrix q(d, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < d; ++i) q(i, j) = rng.normal();

  double previous = std::numeric_limits<double>::quiet_NaN();
  Vector v;
  double value = 0.0;
  for (std::size_t iter = 1; iter <= options.max_iter; ++iter) {
    out.iterations = iter;
    const Matrix z = m * q;
    Eigen::HouseholderQR<Matrix> qr(z);
    q = qr.householderQ() * Matrix::Identity(d, p);
    const Matrix mq = m * q;
    const Eigen::SelfAdjointEigenSolver<Matrix> ritz(q.transpose() * mq);
    Eigen::Index arg = 0;
    ritz.eigenvalues().cwiseAbs().maxCoeff(&arg);
    value = ritz.eigenvalues()(arg);
    v = q * ritz.eigenvectors().col(arg);
    const double residual = (mq * ritz.eigenvectors().col(arg) - value * v).norm();
    const bool done = std::abs(value - previous) < options.tol * std::abs(value) &&
                      residual <= std::sqrt(options.tol) * scale;
    previous = value;
    if (done) {
      out.converged = true;
      break;
    }
  }
  v.normalize();
  out.value = value;
  fix_sign(v);
  out.vector = std::move(v);
  return out;
}

Matrix pca_fit(const Matrix& X, std::size_t k) {
  require(k >= 1 && k <= static_cast<std::size_t>(X.cols()), "PCA rank must lie in [1, d]");
  require(X.rows() >= 2, "PCA needs at least two rows");
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const Matrix centered = X.rowwise() - mean;
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(X.rows() - 1);
  cov = 0.5 * (cov + cov.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) fail(ErrorCode::kParameter, "PCA eigensolver failed");
  const auto kk = static_cast<Eigen::Index>(k);
  // Eigen orders eigenvalues ascending.
  Matrix basis = solver.eigenvectors().rightCols(kk).rowwise().reverse();
  for (Eigen::Index j = 0; j < kk; ++j) {
    Vector col = basis.col(j);
    fix_sign(col);
    basis.col(j) = col;
  }
  return basis;
}

Clustering single_linkage_clusters(std::span<const Vector> points, double radius) {
  require(!points.empty(), "clustering needs at least one point");
  require(radius >= 0.0, "clustering radius must be non-negative");
  const std::size_t n = points.size();
  DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(points[i].size() == points.front().size(), "points differ in dimension");
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((points[i] - points[j]).norm() <= radius) sets.unite(i, j);
    }
  }
  Clustering out;
  out.assignment.assign(n, 0);
  std::vector<std::size_t> cluster_of_root(n, n);
  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = sets.find(i);
    if (cluster_of_root[root] == n) {
      cluster_of_root[root] = out.centers.size();
      out.centers.push_back(Vector::Zero(points[i].size()));
      sizes.push_back(0);
    }
    const std::size_t c = cluster_of_root[root];
    out.assignment[i] = c;
    out.centers[c] += points[i];
    ++sizes[c];
  }
  for (std::size_t c = 0; c < out.centers.size(); ++c) {
    out.centers[c] /= static_cast<double>(sizes[c]);
  }
  return out;
}

}  // namespace exldr
