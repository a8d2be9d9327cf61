#include "exldr/sketch.hpp"

#include <utility>

#include "exldr/error.hpp"

namespace exldr {
namespace {

std::span<const BucketEntry> checked_members(const BucketAssignment& assignment,
                                             std::size_t t, std::size_t b) {
  auto members = assignment.members(t, b);
  if (members.empty()) fail(ErrorCode::kEmptyBucket, "bucket holds no rows");
  return members;
}

// Gathers the signed rows of one bucket: A has one row s_i x_i per member.
void gather(const Matrix& X, const Vector& y, std::span<const BucketEntry> members,
            Matrix& A, Vector& signed_y) {
  const auto count = static_cast<Eigen::Index>(members.size());
  A.resize(count, X.cols());
  signed_y.resize(count);
  for (Eigen::Index k = 0; k < count; ++k) {
    const auto& e = members[static_cast<std::size_t>(k)];
    const double s = e.sign;
    A.row(k) = s * X.row(e.row);
    signed_y(k) = s * y(e.row);
  }
}

void check_data(const Matrix& X, const Vector& y, const BucketAssignment& assignment,
                std::size_t t, std::size_t b) {
  require(X.rows() == y.size(), "design and response row counts differ");
  require(t < assignment.repetition_count() && b < assignment.bucket_count(),
          "bucket key out of range");
}

}  // namespace

BucketAssignment::BucketAssignment(std::size_t repetitions, std::size_t buckets,
                                   std::vector<std::size_t> offsets,
                                   std::vector<BucketEntry> entries)
    : repetitions_(repetitions),
      buckets_(buckets),
      offsets_(std::move(offsets)),
      entries_(std::move(entries)) {
  require(offsets_.size() == repetitions_ * buckets_ + 1, "offset table size mismatch");
}

std::span<const BucketEntry> BucketAssignment::members(std::size_t t, std::size_t b) const {
  require(t < repetitions_ && b < buckets_, "bucket key out of range");
  const std::size_t slot = t * buckets_ + b;
  return {entries_.data() + offsets_[slot], offsets_[slot + 1] - offsets_[slot]};
}

std::vector<BucketKey> BucketAssignment::non_empty() const {
  std::vector<BucketKey> keys;
  for (std::size_t t = 0; t < repetitions_; ++t) {
    for (std::size_t b = 0; b < buckets_; ++b) {
      const std::size_t slot = t * buckets_ + b;
      if (offsets_[slot + 1] > offsets_[slot]) {
        keys.push_back({static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(b)});
      }
    }
  }
  return keys;
}

BucketAssignment assign_buckets(const Matrix& X, const Vector& y,
                                std::span<const ExpanderSketch> graphs) {
  require(!graphs.empty(), "at least one repetition is required");
  require(X.rows() == y.size(), "design and response row counts differ");
  const std::size_t n = static_cast<std::size_t>(X.rows());
  const std::size_t buckets = graphs.front().n_buckets();
  const std::size_t degree = graphs.front().degree();
  for (const auto& g : graphs) {
    require(g.n_left() == n, "graph left size does not match the row count");
    require(g.n_buckets() == buckets && g.degree() == degree,
            "all repetitions must share bucket count and degree");
  }
  const std::size_t r = graphs.size();

  std::vector<std::size_t> offsets(r * buckets + 1, 0);
  for (std::size_t t = 0; t < r; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::uint32_t b : graphs[t].buckets_of(i)) ++offsets[t * buckets + b + 1];
    }
  }
  for (std::size_t s = 1; s < offsets.size(); ++s) offsets[s] += offsets[s - 1];

  std::vector<BucketEntry> entries(offsets.back());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::size_t t = 0; t < r; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto bs = graphs[t].buckets_of(i);
      const auto ss = graphs[t].signs_of(i);
      for (std::size_t j = 0; j < degree; ++j) {
        entries[cursor[t * buckets + bs[j]]++] = {static_cast<std::uint32_t>(i), ss[j]};
      }
    }
  }
  return BucketAssignment(r, buckets, std::move(offsets), std::move(entries));
}

BucketStats bucket_moments(const Matrix& X, const Vector& y,
                           const BucketAssignment& assignment, std::size_t t,
                           std::size_t b) {
  check_data(X, y, assignment, t, b);
  const auto members = checked_members(assignment, t, b);
  Matrix A;
  Vector sy;
  gather(X, y, members, A, sy);
  const double inv = 1.0 / static_cast<double>(members.size());
  BucketStats stats;
  Matrix H;
  H.noalias() = A.transpose() * A;
  stats.H = (0.5 * inv) * (H + H.transpose());
  stats.g.noalias() = A.transpose() * sy;
  stats.g *= inv;
  stats.count = members.size();
  return stats;
}

Matrix bucket_residual_matrix(const Matrix& X, const Vector& y,
                              const BucketAssignment& assignment, std::size_t t,
                              std::size_t b, const Vector& ell_hat) {
  check_data(X, y, assignment, t, b);
  require(ell_hat.size() == X.cols(), "regressor dimension mismatch");
  const auto members = checked_members(assignment, t, b);
  Matrix A;
  Vector sy;
  gather(X, y, members, A, sy);
  // s r = s y - (s x)ᵀ ell, and (s r)² = r², so weighting rows by |r| keeps
  // the product sign-free.
  const Vector residual = sy - A * ell_hat;
  A.array().colwise() *= residual.array();
  Matrix C;
  C.noalias() = A.transpose() * A;
  return (0.5 / static_cast<double>(members.size())) * (C + C.transpose());
}

}  // namespace exldr
