#include "mmdtest/simulation.hpp"

#include "mmdtest/error.hpp"
#include "mmdtest/kernel.hpp"
#include "mmdtest/parallel.hpp"
#include "mmdtest/statistic.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <mutex>

namespace mmdtest {

Dataset sample_mvn(const GaussianParams& params, Eigen::Index n, Rng& rng) {
  if (n < 1) throw InvalidArgument("sample_mvn needs n >= 1");
  return Dataset(MvnSampler(params).sample(n, rng));
}

std::string_view to_string(Family family) {
  switch (family) {
    case Family::gaussian: return "gaussian";
    case Family::uniform_std: return "uniform";
    case Family::exponential_std: return "exponential";
  }
  return "unknown";
}

std::string_view to_string(Correlation correlation) {
  switch (correlation) {
    case Correlation::independent: return "independent";
    case Correlation::banded_geometric: return "banded";
  }
  return "unknown";
}

std::optional<Family> parse_family(std::string_view text) {
  if (text == "gaussian" || text == "normal") return Family::gaussian;
  if (text == "uniform" || text == "uniform_std") return Family::uniform_std;
  if (text == "exponential" || text == "exponential_std") return Family::exponential_std;
  return std::nullopt;
}

std::optional<Correlation> parse_correlation(std::string_view text) {
  if (text == "independent") return Correlation::independent;
  if (text == "banded" || text == "banded_geometric") return Correlation::banded_geometric;
  return std::nullopt;
}

std::string_view to_string(ThresholdSource source) {
  switch (source) {
    case ThresholdSource::monte_carlo: return "monte-carlo";
    case ThresholdSource::moment_chisq: return "moment-chisq";
  }
  return "unknown";
}

Matrix banded_correlation(Eigen::Index d) {
  if (d < 1) throw InvalidArgument("dimension must be >= 1");
  Matrix r = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto lag = std::abs(i - j);
      if (lag <= 5) r(i, j) = std::pow(0.5, static_cast<double>(lag));
    }
  }
  return r;
}

namespace {

Matrix compute_correlation_root(Eigen::Index d) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(banded_correlation(d));
  Vector values = eig.eigenvalues();
  const Matrix& vectors = eig.eigenvectors();
  if (values.minCoeff() < 0.0) {
    std::clog << "warning: banded correlation matrix for d=" << d
              << " is indefinite; clamping eigenvalues and renormalizing\n";
    values = values.cwiseMax(0.0);
    Matrix clamped = vectors * values.asDiagonal() * vectors.transpose();
    const Vector scale = clamped.diagonal().cwiseSqrt().cwiseInverse();
    clamped = scale.asDiagonal() * clamped * scale.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> again(clamped);
    const Vector root = again.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return again.eigenvectors() * root.asDiagonal() * again.eigenvectors().transpose();
  }
  return vectors * values.cwiseSqrt().asDiagonal() * vectors.transpose();
}

}  // namespace

Matrix banded_correlation_root(Eigen::Index d) {
  static std::mutex mutex;
  static std::map<Eigen::Index, Matrix> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(d);
  if (it == cache.end()) it = cache.emplace(d, compute_correlation_root(d)).first;
  return it->second;
}

Dataset sample_alternative(const AlternativeSpec& spec, Eigen::Index n, Rng& rng) {
  if (n < 1) throw InvalidArgument("sample_alternative needs n >= 1");
  if (spec.d < 1) throw InvalidArgument("sample_alternative needs d >= 1");
  Matrix z(n, spec.d);
  switch (spec.family) {
    case Family::gaussian:
      z = standard_normal_matrix(n, spec.d, rng);
      break;
    case Family::uniform_std: {
      std::uniform_real_distribution<double> uniform(0.0, 1.0);
      const double scale = std::sqrt(12.0);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < spec.d; ++j) z(i, j) = (uniform(rng) - 0.5) * scale;
      }
      break;
    }
    case Family::exponential_std: {
      std::exponential_distribution<double> exponential(1.0);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < spec.d; ++j) z(i, j) = exponential(rng) - 1.0;
      }
      break;
    }
  }
  if (spec.correlation == Correlation::banded_geometric) {
    // root is symmetric, so Z root^T = Z root.
    z = (z * banded_correlation_root(spec.d)).eval();
  }
  return Dataset(std::move(z));
}

double d_metric(std::span<const double> engine, std::span<const double> reference) {
  if (engine.size() != reference.size()) throw InvalidArgument("d_metric: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < engine.size(); ++i) sum += std::abs(engine[i] - reference[i]);
  return sum;
}

namespace {

template <class F>
std::pair<std::vector<double>, double> timed(int runs, F&& compute) {
  std::vector<double> seconds;
  std::vector<double> result;
  for (int run = 0; run < std::max(1, runs); ++run) {
    const auto start = std::chrono::steady_clock::now();
    result = compute();
    const auto stop = std::chrono::steady_clock::now();
    seconds.push_back(std::chrono::duration<double>(stop - start).count());
  }
  std::sort(seconds.begin(), seconds.end());
  return {std::move(result), seconds[seconds.size() / 2]};
}

}  // namespace

AccuracyReport accuracy_experiment(Eigen::Index d, Eigen::Index n, double sigma,
                                   std::span<const Engine> engines,
                                   const AccuracyOptions& options, std::uint64_t seed) {
  if (options.iterations < 500) {
    throw InvalidArgument("accuracy study needs at least 500 reference iterations");
  }
  if (options.alphas.empty()) throw InvalidArgument("accuracy study needs at least one alpha");
  detail::require_sigma(sigma);

  AccuracyReport report;
  report.d = d;
  report.n = n;
  report.sigma = sigma;
  report.iterations = options.iterations;
  report.moment_mode = options.moment_mode;
  report.alphas = options.alphas;

  const GaussianParams standard = GaussianParams::standard(d);
  const bool per_replication = options.moment_mode == MomentMode::per_replication;
  const NullSimulation reference =
      per_replication
          ? monte_carlo_null_with_fits(standard, n, sigma, options.iterations, seed)
          : NullSimulation{monte_carlo_null(standard, n, sigma, options.iterations, seed), {}};
  for (double alpha : options.alphas) {
    report.reference_quantiles.push_back(empirical_upper_quantile(reference.statistics, alpha));
  }

  Rng data_rng = make_stream(seed, StreamPurpose::dataset, 0);
  const Dataset data = sample_mvn(standard, n, data_rng);
  const GaussianParams estimate = sample_moments(data);

  for (Engine engine : engines) {
    auto compute = [&]() -> std::vector<double> {
      std::vector<double> out;
      switch (engine) {
        case Engine::moment_chisq: {
          if (per_replication) {
            for (double alpha : options.alphas) {
              out.push_back(mean_replication_quantile(reference, alpha));
            }
            break;
          }
          const ChiSqFit fit = fit_chisq(asymptotic_moments(estimate, sigma));
          for (double alpha : options.alphas) out.push_back(chisq_quantile(fit, alpha));
          break;
        }
        case Engine::gram_chisq: {
          Rng rng = make_stream(seed, StreamPurpose::gram_sample, 0);
          const auto spec =
              gram_spectrum(estimate, sigma, options.l_ii, rng, SpectrumMode::traces_only);
          const ChiSqFit fit = approx_ii_fit(spec);
          for (double alpha : options.alphas) out.push_back(chisq_quantile(fit, alpha));
          break;
        }
        case Engine::spec_sum: {
          Rng rng = make_stream(seed, StreamPurpose::gram_sample, 1);
          const auto spec = gram_spectrum(estimate, sigma, options.l_spec, rng);
          Rng draw_rng = make_stream(seed, StreamPurpose::spec_draws, 0);
          const auto draws = spec_null_draws(spec, options.spec_draws, draw_rng);
          for (double alpha : options.alphas) out.push_back(empirical_upper_quantile(draws, alpha));
          break;
        }
        case Engine::monte_carlo: {
          // Parametric bootstrap from the single dataset's (m_hat, S_hat).
          const auto boot =
              monte_carlo_null(estimate, n, sigma, options.mc_iterations, seed ^ 0x9e3779b97f4a7c15ULL);
          for (double alpha : options.alphas) out.push_back(empirical_upper_quantile(boot, alpha));
          break;
        }
      }
      return out;
    };

    auto [quantiles, seconds] = timed(options.timing_runs, compute);
    EngineAccuracy row{engine, std::move(quantiles), 0.0, seconds};
    row.d_metric = d_metric(row.quantiles, report.reference_quantiles);
    report.engines.push_back(std::move(row));
  }
  return report;
}

PowerReport power_at_threshold(const AlternativeSpec& spec, Eigen::Index n,
                               const KernelConfig& kernel, int replications, double threshold,
                               std::uint64_t seed, double alpha) {
  if (replications < 100) throw InvalidArgument("power study needs at least 100 replications");
  detail::require_sigma(kernel.sigma);
  std::vector<char> rejected(static_cast<std::size_t>(replications), 0);
  parallel_for(rejected.size(), [&](std::size_t i) {
    Rng rng = make_stream(seed, StreamPurpose::alternative_replication, i);
    const Dataset data = sample_alternative(spec, n, rng);
    const double statistic = static_cast<double>(n) * mmd_sq_statistic(data, kernel.sigma);
    rejected[i] = statistic >= threshold ? 1 : 0;
  });

  PowerReport report;
  report.spec = spec;
  report.n = n;
  report.kernel = kernel;
  report.alpha = alpha;
  report.replications = replications;
  report.rejections = static_cast<int>(std::count(rejected.begin(), rejected.end(), 1));
  report.power = static_cast<double>(report.rejections) / replications;
  report.threshold_source = ThresholdSource::monte_carlo;
  report.threshold = threshold;
  return report;
}

PowerReport power_experiment(const AlternativeSpec& spec, Eigen::Index n,
                             const KernelConfig& kernel, const PowerOptions& options,
                             std::uint64_t seed) {
  if (options.replications < 100) {
    throw InvalidArgument("power study needs at least 100 replications");
  }
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
    throw InvalidArgument("alpha must lie in (0, 1)");
  }
  if (options.threshold_source == ThresholdSource::monte_carlo) {
    const auto null = monte_carlo_null(GaussianParams::standard(spec.d), n, kernel.sigma,
                                       options.null_iterations, seed);
    const double threshold = empirical_upper_quantile(null, options.alpha);
    return power_at_threshold(spec, n, kernel, options.replications, threshold, seed,
                              options.alpha);
  }

  detail::require_sigma(kernel.sigma);
  std::vector<char> rejected(static_cast<std::size_t>(options.replications), 0);
  parallel_for(rejected.size(), [&](std::size_t i) {
    Rng rng = make_stream(seed, StreamPurpose::alternative_replication, i);
    const Dataset data = sample_alternative(spec, n, rng);
    const double statistic = static_cast<double>(n) * mmd_sq_statistic(data, kernel.sigma);
    const auto fit = moment_fit(sample_moments(data), kernel.sigma);
    rejected[i] = (fit && statistic >= chisq_quantile(*fit, options.alpha)) ? 1 : 0;
  });

  PowerReport report;
  report.spec = spec;
  report.n = n;
  report.kernel = kernel;
  report.alpha = options.alpha;
  report.replications = options.replications;
  report.rejections = static_cast<int>(std::count(rejected.begin(), rejected.end(), 1));
  report.power = static_cast<double>(report.rejections) / options.replications;
  report.threshold_source = ThresholdSource::moment_chisq;
  return report;
}

}  // namespace mmdtest
