#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mmdtest {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Mean vector and covariance matrix of a d-variate Gaussian.
///
/// The covariance is symmetrized as (S + S^T)/2 on construction and must be
/// positive semidefinite up to -1e-10 * ||S||.
class GaussianParams {
 public:
  /// Tag for covariances that are PSD by construction (sample covariances,
  /// Gram products); skips the O(d^3) eigenvalue audit.
  struct psd_by_construction_t {};
  static constexpr psd_by_construction_t psd_by_construction{};

  GaussianParams(Vector mean, Matrix cov);
  GaussianParams(Vector mean, Matrix cov, psd_by_construction_t);

  /// N(0, I_d).
  static GaussianParams standard(Eigen::Index d);

  const Vector& mean() const noexcept { return mean_; }
  const Matrix& cov() const noexcept { return cov_; }
  Eigen::Index dim() const noexcept { return mean_.size(); }

 private:
  Vector mean_;
  Matrix cov_;
};

enum class BandwidthRule { explicit_value, median_heuristic, dim_power };

/// Gaussian-kernel scale sigma in k(x, y) = exp(-sigma ||x - y||^2) together
/// with the rule that produced it.
struct KernelConfig {
  double sigma;
  BandwidthRule rule = BandwidthRule::explicit_value;
  double exponent = 0.0;  // only meaningful for dim_power
};

/// n x d observations, rows are samples. All entries finite, n, d >= 1.
class Dataset {
 public:
  explicit Dataset(Matrix values);

  const Matrix& values() const noexcept { return values_; }
  Eigen::Index n() const noexcept { return values_.rows(); }
  Eigen::Index d() const noexcept { return values_.cols(); }

 private:
  Matrix values_;
};

enum class Engine { moment_chisq, gram_chisq, spec_sum, monte_carlo };

std::string_view to_string(Engine engine);
/// Accepts "moment-chisq", "gram-chisq", "spec", "spec-sum", "monte-carlo"
/// and the underscore spellings.
std::optional<Engine> parse_engine(std::string_view text);

}  // namespace mmdtest
