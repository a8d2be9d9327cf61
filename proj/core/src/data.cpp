#include "exldr/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>

#include "exldr/error.hpp"
#include "exldr/numkit.hpp"
#include "exldr/rng.hpp"

namespace exldr {
namespace {

std::size_t inlier_target(std::size_t n, double alpha) {
  return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n) + 1e-9));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' ||
                        s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    fields.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

bool parse_double(std::string_view field, double& out) {
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size() && std::isfinite(out);
}

std::size_t resolve_column(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
  std::size_t index = 0;
  const auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), index);
  if (ec == std::errc() && ptr == name.data() + name.size() && index < header.size()) {
    return index;
  }
  fail(ErrorCode::kFormat, "column '" + name + "' not found in header");
}

std::vector<std::size_t> shuffled_indices(std::size_t n, CounterRng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  shuffle(std::span<std::size_t>(idx), rng);
  return idx;
}

}  // namespace

std::size_t Dataset::inlier_count() const {
  if (!inlier_mask) return rows();
  return static_cast<std::size_t>(std::count(inlier_mask->begin(), inlier_mask->end(), true));
}

void Dataset::validate() const {
  require(X.rows() == y.size(), "design and response row counts differ");
  if (inlier_mask) {
    require(inlier_mask->size() == rows(), "inlier mask length differs from row count");
    const std::size_t k = inlier_count();
    require(k >= 1 && k <= rows(), "inlier mask must mark at least one row");
  }
  if (w_star) require(w_star->size() == X.cols(), "ground truth dimension mismatch");
}

void SynthConfig::validate() const {
  require(n >= 1 && d >= 1, "n and d must be positive");
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  require(noise_sigma >= 0.0 && outlier_scale >= 0.0, "noise and outlier scale must be >= 0");
  require(inlier_target(n, alpha) >= 1, "alpha * n must leave at least one inlier");
}

Dataset gen_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  CounterRng rng = CounterRng::keyed({cfg.seed, 0, 0}, Stream::kData);
  const auto d = static_cast<Eigen::Index>(cfg.d);
  const auto n = static_cast<Eigen::Index>(cfg.n);

  Dataset data;
  data.w_star = Vector(d);
  for (Eigen::Index j = 0; j < d; ++j) (*data.w_star)(j) = rng.normal();
  data.X.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) data.X(i, j) = rng.normal();
  }

  const auto order = shuffled_indices(cfg.n, rng);
  const std::size_t n_in = inlier_target(cfg.n, cfg.alpha);
  data.inlier_mask = std::vector<bool>(cfg.n, false);
  for (std::size_t k = 0; k < n_in; ++k) (*data.inlier_mask)[order[k]] = true;

  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if ((*data.inlier_mask)[static_cast<std::size_t>(i)]) {
      data.y(i) = data.X.row(i).dot(*data.w_star) + cfg.noise_sigma * rng.normal();
    } else {
      data.y(i) = rng.uniform(-cfg.outlier_scale, cfg.outlier_scale);
    }
  }
  return data;
}

Dataset gen_clean_test(const Vector& w_star, std::size_t n_test, double noise_sigma,
                       std::uint64_t seed) {
  require(n_test >= 1 && w_star.size() >= 1, "test set needs rows and a dimension");
  CounterRng rng = CounterRng::keyed({seed, 1, 0}, Stream::kData);
  const auto d = w_star.size();
  Dataset test;
  test.w_star = w_star;
  test.X.resize(static_cast<Eigen::Index>(n_test), d);
  test.y.resize(static_cast<Eigen::Index>(n_test));
  for (Eigen::Index i = 0; i < test.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) test.X(i, j) = rng.normal();
    test.y(i) = test.X.row(i).dot(w_star) + noise_sigma * rng.normal();
  }
  test.inlier_mask = std::vector<bool>(n_test, true);
  return test;
}

Metrics evaluate(const Vector& w_hat, const Dataset& test) {
  require(test.w_star.has_value(), "evaluation needs the ground-truth parameter");
  require(w_hat.size() == test.X.cols(), "estimate dimension mismatch");
  require(test.X.rows() >= 1, "evaluation needs at least one test row");
  const Vector diff = w_hat - *test.w_star;
  Metrics m;
  m.param_error = diff.norm();
  m.test_mse = (test.X * diff).squaredNorm() / static_cast<double>(test.X.rows());
  return m;
}

double observed_mse(const Vector& w_hat, const Matrix& X, const Vector& y) {
  require(X.rows() == y.size() && X.rows() >= 1, "evaluation data is malformed");
  require(w_hat.size() == X.cols(), "estimate dimension mismatch");
  return (X * w_hat - y).squaredNorm() / static_cast<double>(X.rows());
}

Table load_table(const std::filesystem::path& path, const TableSchema& schema) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());

  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    for (auto field : split(line, schema.delimiter)) header.emplace_back(field);
    break;
  }
  if (header.size() < 2) fail(ErrorCode::kFormat, "header must name at least two columns");
  for (const auto& name : header) {
    if (name.empty()) fail(ErrorCode::kFormat, "header contains an empty column name");
  }

  const std::size_t response = schema.response_column.empty()
                                   ? header.size() - 1
                                   : resolve_column(header, schema.response_column);
  std::vector<std::size_t> features;
  if (schema.feature_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != response) features.push_back(c);
    }
  } else {
    for (const auto& name : schema.feature_columns) {
      const std::size_t c = resolve_column(header, name);
      if (c == response) fail(ErrorCode::kFormat, "response column listed as a feature");
      features.push_back(c);
    }
  }

  Table table;
  for (std::size_t c : features) table.feature_names.push_back(header[c]);
  std::vector<double> values;
  std::vector<double> responses;
  std::vector<double> row(features.size());
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split(line, schema.delimiter);
    bool ok = fields.size() == header.size();
    double target = 0.0;
    if (ok) ok = parse_double(fields[response], target);
    for (std::size_t k = 0; ok && k < features.size(); ++k) {
      ok = parse_double(fields[features[k]], row[k]);
    }
    if (!ok) {
      ++table.rejected_rows;
      continue;
    }
    values.insert(values.end(), row.begin(), row.end());
    responses.push_back(target);
  }
  if (responses.empty()) fail(ErrorCode::kFormat, "no valid rows in " + path.string());

  const auto n = static_cast<Eigen::Index>(responses.size());
  const auto k = static_cast<Eigen::Index>(features.size());
  table.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                  Eigen::RowMajor>>(values.data(), n, k);
  table.response = Eigen::Map<const Vector>(responses.data(), n);
  return table;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  data.validate();
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out.precision(17);
  for (Eigen::Index j = 0; j < data.X.cols(); ++j) out << 'x' << j << ',';
  out << 'y';
  if (data.inlier_mask) out << ",inlier";
  out << '\n';
  for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) out << data.X(i, j) << ',';
    out << data.y(i);
    if (data.inlier_mask) out << ',' << ((*data.inlier_mask)[static_cast<std::size_t>(i)] ? 1 : 0);
    out << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

Matrix standardize_columns(const Matrix& X) {
  require(X.rows() >= 1, "cannot standardize an empty design");
  Matrix Z = X;
  const double n = static_cast<double>(X.rows());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double mean = Z.col(j).sum() / n;
    Z.col(j).array() -= mean;
    const double sd = std::sqrt(Z.col(j).squaredNorm() / n);
    if (sd > 1e-12 * std::max(1.0, std::abs(mean))) Z.col(j) /= sd;
  }
  return Z;
}

Matrix polynomial_features_deg2(const Matrix& X) {
  const Eigen::Index k = X.cols();
  Matrix out(X.rows(), k + k * (k + 1) / 2);
  out.leftCols(k) = X;
  Eigen::Index col = k;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i; j < k; ++j) {
      out.col(col++) = X.col(i).cwiseProduct(X.col(j));
    }
  }
  return out;
}

RealMixture build_real_mixture(const Table& inliers, const Table& outliers,
                               const MixtureConfig& cfg) {
  const Eigen::Index width = inliers.features.cols();
  require(width >= outliers.features.cols(), "inlier table must be at least as wide as outliers");
  require(cfg.alpha > 0.0 && cfg.alpha <= 1.0, "alpha must lie in (0, 1]");
  const std::size_t n_in_train = inlier_target(cfg.n, cfg.alpha);
  const std::size_t n_out_train = cfg.n - n_in_train;
  const auto n_in_rows = static_cast<std::size_t>(inliers.features.rows());
  const auto n_out_rows = static_cast<std::size_t>(outliers.features.rows());
  if (n_in_rows < cfg.n_test + std::max<std::size_t>(n_in_train, 1)) {
    fail(ErrorCode::kInsufficientRows, "inlier table too small for the requested split");
  }
  if (n_out_rows < n_out_train) {
    fail(ErrorCode::kInsufficientRows, "outlier table too small for the requested split");
  }

  const auto total = static_cast<Eigen::Index>(n_in_rows + n_out_rows);
  Matrix stacked = Matrix::Zero(total, width);
  stacked.topRows(static_cast<Eigen::Index>(n_in_rows)) = inliers.features;
  stacked.bottomRows(static_cast<Eigen::Index>(n_out_rows)).leftCols(outliers.features.cols()) =
      outliers.features;
  const Matrix expanded = polynomial_features_deg2(standardize_columns(stacked));
  require(cfg.pca_dim >= 1 && cfg.pca_dim <= static_cast<std::size_t>(expanded.cols()),
          "pca_dim exceeds the expanded feature width");
  const Matrix basis = pca_fit(expanded, cfg.pca_dim);
  const Eigen::RowVectorXd mean = expanded.colwise().mean();
  const Matrix projected = (expanded.rowwise() - mean) * basis;

  CounterRng rng = CounterRng::keyed({cfg.seed, 0, 0}, Stream::kMixture);
  const auto in_order = shuffled_indices(n_in_rows, rng);
  const auto out_order = shuffled_indices(n_out_rows, rng);

  RealMixture mix;
  std::vector<std::size_t> pool(in_order.begin() + static_cast<std::ptrdiff_t>(cfg.n_test),
                                in_order.end());
  double offset = 0.0;
  for (std::size_t i : pool) offset += inliers.response(static_cast<Eigen::Index>(i));
  offset /= static_cast<double>(pool.size());
  mix.response_offset = offset;

  const auto dim = static_cast<Eigen::Index>(cfg.pca_dim);
  mix.test.X.resize(static_cast<Eigen::Index>(cfg.n_test), dim);
  mix.test.y.resize(static_cast<Eigen::Index>(cfg.n_test));
  for (std::size_t k = 0; k < cfg.n_test; ++k) {
    const auto i = static_cast<Eigen::Index>(in_order[k]);
    mix.test.X.row(static_cast<Eigen::Index>(k)) = projected.row(i);
    mix.test.y(static_cast<Eigen::Index>(k)) = inliers.response(i) - offset;
  }
  mix.test.inlier_mask = std::vector<bool>(cfg.n_test, true);

  mix.oracle_X.resize(static_cast<Eigen::Index>(pool.size()), dim);
  mix.oracle_y.resize(static_cast<Eigen::Index>(pool.size()));
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(pool[k]);
    mix.oracle_X.row(static_cast<Eigen::Index>(k)) = projected.row(i);
    mix.oracle_y(static_cast<Eigen::Index>(k)) = inliers.response(i) - offset;
  }

  std::vector<double> outlier_y(n_out_train);
  for (std::size_t k = 0; k < n_out_train; ++k) {
    outlier_y[k] = outliers.response(static_cast<Eigen::Index>(out_order[k])) - offset;
  }
  shuffle(std::span<double>(outlier_y), rng);

  const auto n = static_cast<Eigen::Index>(cfg.n);
  const auto row_order = shuffled_indices(cfg.n, rng);
  mix.train.X.resize(n, dim);
  mix.train.y.resize(n);
  mix.train.inlier_mask = std::vector<bool>(cfg.n, false);
  for (std::size_t k = 0; k < cfg.n; ++k) {
    const auto dst = static_cast<Eigen::Index>(row_order[k]);
    if (k < n_in_train) {
      const auto src = static_cast<Eigen::Index>(pool[k]);
      mix.train.X.row(dst) = projected.row(src);
      mix.train.y(dst) = inliers.response(src) - offset;
      (*mix.train.inlier_mask)[row_order[k]] = true;
    } else {
      const std::size_t j = k - n_in_train;
      const auto src = static_cast<Eigen::Index>(n_in_rows + out_order[j]);
      mix.train.X.row(dst) = projected.row(src);
      mix.train.y(dst) = outlier_y[j];
    }
  }
  return mix;
}

}  // namespace exldr
