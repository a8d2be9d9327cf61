#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "exldr/types.hpp"

namespace exldr {

struct Dataset {
  Matrix X;
  Vector y;
  std::optional<std::vector<bool>> inlier_mask;
  std::optional<Vector> w_star;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(X.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(X.cols()); }
  std::size_t inlier_count() const;
  void validate() const;
};

struct SynthConfig {
  std::size_t n = 5000;
  std::size_t d = 20;
  double alpha = 0.3;
  double noise_sigma = 0.1;
  double outlier_scale = 10.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Gaussian design, w* ~ N(0, I); floor(alpha n) shuffled rows follow
/// y = <x, w*> + N(0, sigma²), the rest keep x but draw y ~ U[-S, S].
Dataset gen_synthetic(const SynthConfig& cfg);

/// Independent clean rows from the same model (all inliers).
Dataset gen_clean_test(const Vector& w_star, std::size_t n_test, double noise_sigma,
                       std::uint64_t seed);

struct Metrics {
  double param_error = 0.0;
  double test_mse = 0.0;
};

/// Parameter error and noise-free test MSE against the test set's w*.
Metrics evaluate(const Vector& w_hat, const Dataset& test);

/// Mean squared error against observed responses (for real data, where w*
/// is unknown).
double observed_mse(const Vector& w_hat, const Matrix& X, const Vector& y);

struct TableSchema {
  /// Response column by header name or zero-based index; empty = last.
  std::string response_column;
  /// Feature columns by name; empty = every column except the response.
  std::vector<std::string> feature_columns;
  char delimiter = ',';
};

struct Table {
  std::vector<std::string> feature_names;
  Matrix features;
  Vector response;
  std::size_t rejected_rows = 0;
};

/// Parses a delimited numeric table with a header row. Rows with missing or
/// non-numeric fields are skipped and counted.
Table load_table(const std::filesystem::path& path, const TableSchema& schema = {});

/// Writes x0..x{d-1},y[,inlier] with a header; readable by load_table.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);

struct MixtureConfig {
  std::size_t n = 1400;
  double alpha = 0.3;
  std::size_t pca_dim = 10;
  std::size_t n_test = 1000;
  std::uint64_t seed = 0;
};

struct RealMixture {
  Dataset train;
  Dataset test;
  Matrix oracle_X;  // clean inlier rows outside the test set
  Vector oracle_y;
  double response_offset = 0.0;  // subtracted from every response
};

/// Standardized columns; zero-variance columns are only centered.
Matrix standardize_columns(const Matrix& X);

/// Degree-2 polynomial expansion without bias: x_i, then x_i x_j (i <= j).
Matrix polynomial_features_deg2(const Matrix& X);

/// Pads, standardizes, expands, projects with PCA and splits the two
/// tables into a contaminated training set and a clean test set.
RealMixture build_real_mixture(const Table& inliers, const Table& outliers,
                               const MixtureConfig& cfg);

}  // namespace exldr
