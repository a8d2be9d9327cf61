#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "exldr/rng.hpp"
#include "exldr/types.hpp"

namespace exldr {

/// Solves (sigma_hat + lambda I) x = g_hat by Cholesky. Throws
/// kIndefiniteMoments when the shifted matrix is not positive definite.
Vector ridge_solve(const Matrix& sigma_hat, const Vector& g_hat, double lambda);

struct EigenPair {
  double value = 0.0;
  Vector vector;  // unit norm, largest-magnitude coordinate positive
  bool converged = false;
  std::size_t iterations = 0;
};

struct PowerIterationOptions {
  double tol = 1e-8;
  std::size_t max_iter = 1000;
};

/// Dominant-magnitude eigenpair of a symmetric matrix by block power
/// iteration (three vectors, Rayleigh-Ritz extraction) from a seeded random
/// start. Stops when successive Ritz values differ by less than
/// tol * |value| and the residual is below sqrt(tol) * |m|_F.
EigenPair top_eigenpair(const Matrix& m, const RngLabel& label,
                        const PowerIterationOptions& options = {});

/// Top-k principal directions (d x k, orthonormal columns, descending
/// eigenvalue) of the column-centered covariance of X.
Matrix pca_fit(const Matrix& X, std::size_t k);

struct Clustering {
  std::vector<Vector> centers;
  std::vector<std::size_t> assignment;  // cluster index per input point
};

/// Connected components of the graph joining pairs at distance <= radius.
/// Clusters are numbered by their smallest member index; centers are
/// coordinate means.
Clustering single_linkage_clusters(std::span<const Vector> points, double radius);

}  // namespace exldr
