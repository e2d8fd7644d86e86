#pragma once

// Approximations to the null limit Z = sum_l lambda_l Z_l^2 of n * Delta_hat^2:
//
//  * closed-form E[Z] and V[Z] for a Gaussian reference, fitted by c chi^2_r
//    (moment engine);
//  * the same fit from the trace and squared trace of a sampled Gram matrix
//    of the influence inner product (Gram engine);
//  * direct sampling of sum_l lambda_hat_l Z_l^2 from the Gram eigenvalues
//    (Spec engine);
//  * the parametric bootstrap of n * Delta_hat^2 itself (Monte-Carlo engine).

#include "mmdtest/random.hpp"
#include "mmdtest/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mmdtest {

struct MomentPair {
  double e_z;  // sum lambda_l
  double v_z;  // 2 sum lambda_l^2
};

/// c chi^2_r with mean c r and variance 2 c^2 r. r may be fractional.
struct ChiSqFit {
  double c;
  double r;

  double mean() const noexcept { return c * r; }
  double variance() const noexcept { return 2.0 * c * c * r; }
};

/// E[Z] for reference covariance S:
///   1 - |I+4sS|^{-1/2} {1 + 2s t + 2s^2 t^2 + 4s^2 tr[A^2]},  A = (I+4sS)^{-1} S, t = tr A.
double asymptotic_mean(const GaussianParams& params, double sigma);

/// V[Z] for reference covariance S (three determinant-weighted blocks built from
/// traces of (I+2sS)^{-1}S, (I+6sS)^{-1}S and (I+4sS)^{-1}S).
double asymptotic_variance(const GaussianParams& params, double sigma);

/// Both moments from a single eigendecomposition of S.
MomentPair asymptotic_moments(const GaussianParams& params, double sigma);

/// c = v / (2e), r = 2e^2 / v. Throws InvalidArgument for nonpositive moments.
ChiSqFit fit_chisq(const MomentPair& moments);

/// Moment fit for a reference, or nullopt when the null is a point mass at
/// zero (S = 0 up to roundoff).
std::optional<ChiSqFit> moment_fit(const GaussianParams& params, double sigma);

/// Upper-alpha quantile t with P(c chi^2_r >= t) = alpha.
double chisq_quantile(const ChiSqFit& fit, double alpha);

/// P(c chi^2_r >= statistic); negative statistics are treated as 0.
double p_value(const ChiSqFit& fit, double statistic);

struct SpectralEstimate {
  std::vector<double> eigenvalues;  // descending, clamped at 0; empty in traces-only mode
  double gram_trace = 0.0;
  double gram_sq_trace = 0.0;  // squared Frobenius norm of the Gram matrix
  int l = 0;
  double min_raw_eigenvalue = 0.0;  // before clamping
};

enum class SpectrumMode { full, traces_only };

/// Draws X_1..X_L ~ reference and forms G = (1/L)[<f(X_i), f(X_j)>].
/// In full mode also returns its eigenvalues. Throws NumericError if an
/// eigenvalue falls below -1e-8 * lambda_1.
SpectralEstimate gram_spectrum(const GaussianParams& reference, double sigma, int l, Rng& rng,
                               SpectrumMode mode = SpectrumMode::full);

/// fit_chisq with e = tr G, v = 2 tr G^2.
ChiSqFit approx_ii_fit(const SpectralEstimate& spec);

/// `draws` sorted realizations of sum_l lambda_l Z_l^2.
std::vector<double> spec_null_draws(const SpectralEstimate& spec, int draws, Rng& rng);

/// Empirical upper-alpha quantile of spec_null_draws.
double spec_quantile(const SpectralEstimate& spec, double alpha, int draws, Rng& rng);

/// Order statistic at 1-based index ceil((1 - alpha) N) of an ascending sample.
double empirical_upper_quantile(std::span<const double> sorted, double alpha);

/// (1 + #{x >= statistic}) / (N + 1) for an ascending sample.
double empirical_p_value(std::span<const double> sorted, double statistic);

/// Ascending n * Delta_hat^2 values from `iterations` samples of size n drawn
/// from `reference`. Replication i uses stream (seed, i).
std::vector<double> monte_carlo_null(const GaussianParams& reference, Eigen::Index n,
                                     double sigma, int iterations, std::uint64_t seed);

struct NullSimulation {
  std::vector<double> statistics;  // ascending
  /// Moment fit from each replication's own S_hat, in replication order.
  std::vector<std::optional<ChiSqFit>> replication_fits;
};

/// monte_carlo_null that also records every replication's moment fit.
NullSimulation monte_carlo_null_with_fits(const GaussianParams& reference, Eigen::Index n,
                                          double sigma, int iterations, std::uint64_t seed);

/// Mean over replications of the moment-fit upper-alpha quantile.
double mean_replication_quantile(const NullSimulation& sim, double alpha);

}  // namespace mmdtest
