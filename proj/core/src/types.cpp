#include "mmdtest/types.hpp"

#include "mmdtest/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace mmdtest {

GaussianParams::GaussianParams(Vector mean, Matrix cov, psd_by_construction_t)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  const auto d = mean_.size();
  if (d < 1) throw InvalidArgument("GaussianParams: dimension must be >= 1");
  if (cov_.rows() != d || cov_.cols() != d) {
    throw InvalidArgument("GaussianParams: covariance shape mismatch");
  }
  cov_ = (0.5 * (cov_ + cov_.transpose())).eval();
}

GaussianParams::GaussianParams(Vector mean, Matrix cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  const auto d = mean_.size();
  if (d < 1) throw InvalidArgument("GaussianParams: dimension must be >= 1");
  if (cov_.rows() != d || cov_.cols() != d) {
    throw InvalidArgument("GaussianParams: covariance must be " + std::to_string(d) + "x" +
                          std::to_string(d));
  }
  if (!mean_.allFinite() || !cov_.allFinite()) {
    throw InvalidArgument("GaussianParams: non-finite entries");
  }
  cov_ = (0.5 * (cov_ + cov_.transpose())).eval();

  const double scale = cov_.cwiseAbs().maxCoeff();
  if (scale > 0.0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
      throw InvalidArgument("GaussianParams: covariance is not positive semidefinite");
    }
  }
}

GaussianParams GaussianParams::standard(Eigen::Index d) {
  return GaussianParams(Vector::Zero(d), Matrix::Identity(d, d));
}

Dataset::Dataset(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1) throw InvalidArgument("Dataset: empty dataset");
  if (values_.cols() < 1) throw InvalidArgument("Dataset: zero columns");
  if (!values_.allFinite()) throw InvalidArgument("Dataset: NaN or Inf entries");
}

std::string_view to_string(Engine engine) {
  switch (engine) {
    case Engine::moment_chisq: return "moment-chisq";
    case Engine::gram_chisq: return "gram-chisq";
    case Engine::spec_sum: return "spec";
    case Engine::monte_carlo: return "monte-carlo";
  }
  return "unknown";
}

std::optional<Engine> parse_engine(std::string_view text) {
  if (text == "moment-chisq" || text == "moment_chisq") return Engine::moment_chisq;
  if (text == "gram-chisq" || text == "gram_chisq") return Engine::gram_chisq;
  if (text == "spec" || text == "spec-sum" || text == "spec_sum") return Engine::spec_sum;
  if (text == "monte-carlo" || text == "monte_carlo" || text == "mc") return Engine::monte_carlo;
  return std::nullopt;
}

}  // namespace mmdtest
