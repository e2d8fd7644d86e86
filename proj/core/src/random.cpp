#include "mmdtest/random.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace mmdtest {

Rng make_stream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

Matrix standard_normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
  }
  return out;
}

MvnSampler::MvnSampler(const GaussianParams& params) : mean_(params.mean()) {
  const Matrix& cov = params.cov();
  const auto d = params.dim();
  if (cov.isIdentity(0.0)) {
    factor_ = Matrix::Identity(d, d);
    identity_factor_ = true;
    return;
  }
  const double scale = cov.diagonal().cwiseAbs().maxCoeff();
  Eigen::LLT<Matrix> llt(cov);
  if (scale > 0.0 && llt.info() == Eigen::Success) {
    const Matrix lower = llt.matrixL();
    if (lower.diagonal().minCoeff() > 1e-7 * std::sqrt(scale)) {
      factor_ = lower;
      return;
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  factor_ = eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix MvnSampler::sample(Eigen::Index n, Rng& rng) const {
  Matrix z = standard_normal_matrix(n, mean_.size(), rng);
  if (!identity_factor_) z = (z * factor_.transpose()).eval();
  z.rowwise() += mean_.transpose();
  return z;
}

}  // namespace mmdtest
