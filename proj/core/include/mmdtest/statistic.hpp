#pragma once

#include "mmdtest/types.hpp"

#include <string_view>

namespace mmdtest {

/// Sample mean and the 1/n (biased) sample covariance.
GaussianParams sample_moments(const Dataset& data);

/// The three terms of the squared MMD between the empirical measure and
/// N(m_hat, S_hat):
///   kernel_mean    (1/n^2) sum_ij k(Y_i, Y_j)          (diagonal included)
///   cross_mean     (2/n) sum_i mu(Y_i)
///   embedding_norm |I + 4 sigma S_hat|^{-1/2}
struct StatisticTerms {
  double kernel_mean;
  double cross_mean;
  double embedding_norm;

  /// kernel_mean - cross_mean + embedding_norm, before clamping.
  double raw() const noexcept { return kernel_mean - cross_mean + embedding_norm; }
};

StatisticTerms mmd_sq_terms(const Dataset& data, double sigma);

/// Delta_hat^2 clamped at 0. Multiply by n for the test statistic.
double mmd_sq_statistic(const Dataset& data, double sigma);

/// sigma = 1 / median{ ||Y_i - Y_j||^2 : i < j }, lower-middle order statistic
/// for an even pair count. Throws DegenerateData when the median is 0.
double bandwidth_median(const Dataset& data);

/// d^{-exponent}.
double bandwidth_dim_power(Eigen::Index d, double exponent);

/// How sigma is chosen before the data is seen.
struct BandwidthSpec {
  BandwidthRule rule = BandwidthRule::dim_power;
  double parameter = 1.0;  // sigma for explicit_value, exponent for dim_power

  static BandwidthSpec median() { return {BandwidthRule::median_heuristic, 0.0}; }
  static BandwidthSpec dim_power(double exponent) { return {BandwidthRule::dim_power, exponent}; }
  static BandwidthSpec fixed(double sigma) { return {BandwidthRule::explicit_value, sigma}; }
};

/// Parses "median", "dim-power:<e>" or "explicit:<sigma>". Throws InvalidArgument.
BandwidthSpec parse_bandwidth(std::string_view text);
std::string format_bandwidth(const BandwidthSpec& spec);

KernelConfig resolve_kernel(const BandwidthSpec& spec, const Dataset& data);
/// Resolution that needs only the dimension; throws for the median rule.
KernelConfig resolve_kernel(const BandwidthSpec& spec, Eigen::Index d);

}  // namespace mmdtest
