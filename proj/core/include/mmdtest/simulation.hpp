#pragma once

// Data generators and the two experiment drivers: critical-point accuracy of
// the null approximations and empirical power against standardized
// non-Gaussian alternatives. Every result is a pure function of its
// configuration and seed.

#include "mmdtest/null_approx.hpp"
#include "mmdtest/random.hpp"
#include "mmdtest/types.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace mmdtest {

Dataset sample_mvn(const GaussianParams& params, Eigen::Index n, Rng& rng);

enum class Family { gaussian, uniform_std, exponential_std };
enum class Correlation { independent, banded_geometric };

std::string_view to_string(Family family);
std::string_view to_string(Correlation correlation);
std::optional<Family> parse_family(std::string_view text);
std::optional<Correlation> parse_correlation(std::string_view text);

struct AlternativeSpec {
  Family family = Family::gaussian;
  Eigen::Index d = 1;
  Correlation correlation = Correlation::independent;
};

/// R_ij = (1/2)^{|i-j|} for |i-j| <= 5, else 0.
Matrix banded_correlation(Eigen::Index d);

/// Symmetric PSD square root of banded_correlation(d). If R is indefinite,
/// negative eigenvalues are clamped and the diagonal renormalized to 1, with
/// a warning on std::clog.
Matrix banded_correlation_root(Eigen::Index d);

/// Zero-mean draws with covariance I (independent) or R (banded). Non-Gaussian
/// coordinates are standardized: (U - 1/2) sqrt(12) and E - 1.
Dataset sample_alternative(const AlternativeSpec& spec, Eigen::Index n, Rng& rng);

/// How the moment-fit column of the accuracy study obtains S_hat.
enum class MomentMode {
  single_dataset,   // one dataset of size n
  per_replication,  // average over every Monte-Carlo replication's S_hat
};

struct AccuracyOptions {
  int iterations = 2000;
  int l_ii = 1000;
  int l_spec = 500;
  int spec_draws = 10000;
  int mc_iterations = 2000;  // parametric bootstrap engine
  std::vector<double> alphas{0.1, 0.05, 0.01};
  MomentMode moment_mode = MomentMode::single_dataset;
  int timing_runs = 3;
};

struct EngineAccuracy {
  Engine engine;
  std::vector<double> quantiles;  // aligned with AccuracyReport::alphas
  double d_metric = 0.0;          // sum_alpha |t_alpha(engine) - t_alpha|
  double seconds = 0.0;           // median wall clock over timing_runs
};

struct AccuracyReport {
  Eigen::Index d = 0;
  Eigen::Index n = 0;
  double sigma = 0.0;
  int iterations = 0;
  MomentMode moment_mode = MomentMode::single_dataset;
  std::vector<double> alphas;
  std::vector<double> reference_quantiles;  // Monte-Carlo t_alpha under N(0, I_d)
  std::vector<EngineAccuracy> engines;
};

/// sum_alpha |engine_alpha - reference_alpha|.
double d_metric(std::span<const double> engine, std::span<const double> reference);

AccuracyReport accuracy_experiment(Eigen::Index d, Eigen::Index n, double sigma,
                                   std::span<const Engine> engines,
                                   const AccuracyOptions& options, std::uint64_t seed);

enum class ThresholdSource {
  monte_carlo,   // one t_0.05 from the Monte-Carlo null under N(0, I_d)
  moment_chisq,  // each replication's own moment-fit quantile
};

std::string_view to_string(ThresholdSource source);

struct PowerReport {
  AlternativeSpec spec;
  Eigen::Index n = 0;
  KernelConfig kernel{1.0};
  double alpha = 0.05;
  int rejections = 0;
  int replications = 0;
  double power = 0.0;
  ThresholdSource threshold_source = ThresholdSource::monte_carlo;
  std::optional<double> threshold;  // set for monte_carlo
};

struct PowerOptions {
  int replications = 200;
  int null_iterations = 2000;
  double alpha = 0.05;
  ThresholdSource threshold_source = ThresholdSource::monte_carlo;
};

PowerReport power_experiment(const AlternativeSpec& spec, Eigen::Index n,
                             const KernelConfig& kernel, const PowerOptions& options,
                             std::uint64_t seed);

/// Rejection count against a fixed threshold, for sharing one null across
/// several alternatives.
PowerReport power_at_threshold(const AlternativeSpec& spec, Eigen::Index n,
                               const KernelConfig& kernel, int replications, double threshold,
                               std::uint64_t seed, double alpha = 0.05);

}  // namespace mmdtest
