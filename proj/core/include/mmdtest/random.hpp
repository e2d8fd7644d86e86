#pragma once

#include "mmdtest/types.hpp"

#include <cstdint>
#include <random>

namespace mmdtest {

using Rng = std::mt19937_64;

/// Purposes keep streams derived from one master seed disjoint.
enum class StreamPurpose : std::uint32_t {
  null_replication = 1,
  alternative_replication = 2,
  gram_sample = 3,
  spec_draws = 4,
  dataset = 5,
  engine = 6,
};

/// Independent generator for task `index` under master `seed`. A pure
/// function of its arguments, so per-task streams do not depend on which
/// thread runs the task.
Rng make_stream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index = 0);

/// rows x cols matrix of i.i.d. N(0, 1) draws, filled row by row.
Matrix standard_normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Draws rows m + A z with A A^T = S. A is the Cholesky factor when S is
/// numerically positive definite, otherwise the symmetric square root with
/// negative eigenvalues clamped to zero.
class MvnSampler {
 public:
  explicit MvnSampler(const GaussianParams& params);

  /// n x d matrix of draws; consumes n * d normals row by row.
  Matrix sample(Eigen::Index n, Rng& rng) const;

  const Matrix& factor() const noexcept { return factor_; }

 private:
  Vector mean_;
  Matrix factor_;
  bool identity_factor_ = false;
};

}  // namespace mmdtest
