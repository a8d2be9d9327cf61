#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "exldr/error.hpp"
#include "exldr/sketch.hpp"
#include "oracles.hpp"

using namespace exldr;

namespace {

std::vector<ExpanderSketch> graphs_for(std::size_t n, std::size_t buckets, std::size_t degree,
                                       std::size_t reps, std::uint64_t seed) {
  std::vector<ExpanderSketch> out;
  for (std::size_t t = 0; t < reps; ++t) out.push_back(sample_expander(n, buckets, degree, {seed, 0, t}));
  return out;
}

}  // namespace

TEST_CASE("trivial assignments") {
  Matrix X = Matrix::Ones(1, 2);
  Vector y = Vector::Ones(1);
  const auto one = graphs_for(1, 5, 2, 1, 0);
  const auto a = assign_buckets(X, y, one);
  CHECK(a.total_size() == 2);
  for (const auto& key : a.non_empty()) CHECK(a.members(key)[0].row == 0);

  Matrix X3 = Matrix::Ones(3, 2);
  Vector y3 = Vector::Ones(3);
  const auto complete = graphs_for(3, 3, 3, 1, 0);
  const auto c = assign_buckets(X3, y3, complete);
  for (std::uint32_t b = 0; b < 3; ++b) CHECK(c.count(0, b) == 3);
}

TEST_CASE("membership matches a dense signed sketch") {
  std::mt19937_64 gen(1);
  for (std::size_t n : {50, 77, 100}) {
    const Matrix X = oracle::random_matrix(gen, static_cast<Eigen::Index>(n), 4);
    const Vector y = oracle::random_vector(gen, static_cast<Eigen::Index>(n));
    const auto graphs = graphs_for(n, 10, 2, 2, n);
    const auto a = assign_buckets(X, y, graphs);
    CHECK(a.total_size() == n * 2 * 2);
    for (std::size_t t = 0; t < 2; ++t) {
      const Matrix S = oracle::dense_sketch(graphs[t]);
      const Matrix SX = S * X;
      std::vector<std::size_t> per_row(n);
      for (std::size_t b = 0; b < 10; ++b) {
        Vector sum = Vector::Zero(4);
        std::size_t nnz = 0;
        for (const auto& e : a.members(t, b)) {
          sum += e.sign * X.row(e.row).transpose();
          CHECK(S(static_cast<Eigen::Index>(b), e.row) == e.sign);
          ++per_row[e.row];
        }
        for (std::size_t i = 0; i < n; ++i) nnz += S(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(i)) != 0.0;
        CHECK(nnz == a.count(t, b));
        CHECK((sum - SX.row(static_cast<Eigen::Index>(b)).transpose()).norm() < 1e-12);
        if (a.count(t, b) == 0) continue;
        // Dense oracle for the bucket moments: diag(S_b)^2 selects the bucket rows.
        const Vector sb2 = S.row(static_cast<Eigen::Index>(b)).transpose().cwiseAbs2();
        const Matrix H = X.transpose() * sb2.asDiagonal() * X / static_cast<double>(nnz);
        const Vector g = X.transpose() * sb2.asDiagonal() * y / static_cast<double>(nnz);
        const auto stats = bucket_moments(X, y, a, t, b);
        CHECK((stats.H - H).norm() < 1e-12);
        CHECK((stats.g - g).norm() < 1e-12);
      }
      for (auto c : per_row) CHECK(c == 2);
    }
  }
}

TEST_CASE("bucket moment examples") {
  Matrix X(1, 3);
  X << 1, 0, 0;
  Vector y(1);
  y << 2;
  std::vector<std::vector<std::uint32_t>> adj{{0}};
  const std::vector<ExpanderSketch> g{ExpanderSketch::from_adjacency(2, adj)};
  const auto a = assign_buckets(X, y, g);
  const auto s = bucket_moments(X, y, a, 0, 0);
  CHECK(s.count == 1);
  CHECK(s.H(0, 0) == 1.0);
  CHECK(s.H.sum() == 1.0);
  CHECK(s.g(0) == 2.0);
  CHECK_THROWS_AS(bucket_moments(X, y, a, 0, 1), Error);

  y << 3;
  const Matrix R = bucket_residual_matrix(X, y, a, 0, 0, Vector::Zero(3));
  CHECK(R(0, 0) == 9.0);
  CHECK(R.sum() == 9.0);

  Matrix X2(2, 3);
  X2 << 1, 2, 3, 1, 2, 3;
  Vector y2(2);
  y2 << 4, 4;
  std::vector<std::vector<std::uint32_t>> both{{0}, {0}};
  const std::vector<ExpanderSketch> g2{ExpanderSketch::from_adjacency(1, both)};
  const auto a2 = assign_buckets(X2, y2, g2);
  const auto s2 = bucket_moments(X2, y2, a2, 0, 0);
  CHECK((s2.H - X2.row(0).transpose() * X2.row(0)).norm() < 1e-15);
  CHECK((s2.g - 4.0 * X2.row(0).transpose()).norm() < 1e-15);
}

TEST_CASE("clean bucket concentration") {
  std::mt19937_64 gen(2024);
  const Matrix X = oracle::random_matrix(gen, 500, 5);
  const Vector w = oracle::random_vector(gen, 5);
  const Vector y = X * w;
  std::vector<std::vector<std::uint32_t>> adj(500, std::vector<std::uint32_t>{0});
  const std::vector<ExpanderSketch> g{ExpanderSketch::from_adjacency(1, adj)};
  const auto a = assign_buckets(X, y, g);
  const auto s = bucket_moments(X, y, a, 0, 0);
  const Eigen::SelfAdjointEigenSolver<Matrix> es(s.H - Matrix::Identity(5, 5));
  CHECK(es.eigenvalues().cwiseAbs().maxCoeff() < 0.3);
  CHECK((s.g - w).norm() < 0.3);
}

TEST_CASE("residual matrix equals a naive double loop") {
  std::mt19937_64 gen(3);
  const Matrix X = oracle::random_matrix(gen, 20, 4);
  const Vector y = oracle::random_vector(gen, 20);
  const Vector ell = oracle::random_vector(gen, 4);
  std::vector<std::vector<std::uint32_t>> adj(20, std::vector<std::uint32_t>{0});
  const std::vector<ExpanderSketch> g{ExpanderSketch::from_adjacency(1, adj)};
  const auto a = assign_buckets(X, y, g);
  Matrix ref = Matrix::Zero(4, 4);
  for (int i = 0; i < 20; ++i) {
    double r = y(i);
    for (int k = 0; k < 4; ++k) r -= X(i, k) * ell(k);
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) ref(p, q) += r * r * X(i, p) * X(i, q);
  }
  ref /= 20.0;
  CHECK((bucket_residual_matrix(X, y, a, 0, 0, ell) - ref).norm() < 1e-12 * ref.norm());

  // Exact interpolant of a consistent bucket gives the zero matrix.
  const Vector w = oracle::random_vector(gen, 4);
  const Vector yw = X * w;
  CHECK(bucket_residual_matrix(X, yw, a, 0, 0, w).norm() < 1e-20 + 1e-12 * X.squaredNorm());
}

TEST_CASE("sign flips leave statistics unchanged and g is linear in y") {
  std::mt19937_64 gen(4);
  const Matrix X = oracle::random_matrix(gen, 30, 3);
  const Vector y1 = oracle::random_vector(gen, 30);
  const Vector y2 = oracle::random_vector(gen, 30);
  const Vector ell = oracle::random_vector(gen, 3);
  const auto base = sample_expander(30, 6, 2, {1, 1, 1});
  std::vector<std::vector<std::uint32_t>> adj;
  std::vector<std::vector<std::int8_t>> flipped;
  for (std::size_t i = 0; i < 30; ++i) {
    adj.emplace_back(base.buckets_of(i).begin(), base.buckets_of(i).end());
    std::vector<std::int8_t> s;
    for (auto v : base.signs_of(i)) s.push_back(static_cast<std::int8_t>(i % 3 == 0 ? -v : v));
    flipped.push_back(s);
  }
  const std::vector<ExpanderSketch> g1{base};
  const std::vector<ExpanderSketch> g2{ExpanderSketch::from_adjacency(6, adj, flipped)};
  const auto a1 = assign_buckets(X, y1, g1);
  const auto a2 = assign_buckets(X, y1, g2);
  const Vector ysum = 2.0 * y1 - 3.0 * y2;
  for (const auto& key : a1.non_empty()) {
    const auto s1 = bucket_moments(X, y1, a1, key.repetition, key.bucket);
    const auto s2 = bucket_moments(X, y1, a2, key.repetition, key.bucket);
    CHECK((s1.H - s2.H).norm() < 1e-14);
    CHECK((s1.g - s2.g).norm() < 1e-14);
    CHECK((bucket_residual_matrix(X, y1, a1, key.repetition, key.bucket, ell) -
           bucket_residual_matrix(X, y1, a2, key.repetition, key.bucket, ell))
              .norm() < 1e-12);
    const auto sb = bucket_moments(X, y2, a1, key.repetition, key.bucket);
    const auto ss = bucket_moments(X, ysum, a1, key.repetition, key.bucket);
    CHECK((ss.g - (2.0 * s1.g - 3.0 * sb.g)).norm() < 1e-12);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(s1.H);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
    CHECK((s1.H - s1.H.transpose()).norm() == 0.0);
  }
}

TEST_CASE("mismatched graphs are rejected") {
  Matrix X = Matrix::Ones(10, 2);
  Vector y = Vector::Ones(10);
  std::vector<ExpanderSketch> wrong_n{sample_expander(9, 5, 2, {})};
  CHECK_THROWS_AS(assign_buckets(X, y, wrong_n), Error);
  std::vector<ExpanderSketch> mixed{sample_expander(10, 5, 2, {}), sample_expander(10, 6, 2, {})};
  CHECK_THROWS_AS(assign_buckets(X, y, mixed), Error);
}
