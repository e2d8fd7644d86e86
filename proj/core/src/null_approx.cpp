#include "mmdtest/null_approx.hpp"

#include "mmdtest/error.hpp"
#include "mmdtest/kernel.hpp"
#include "mmdtest/parallel.hpp"
#include "mmdtest/special.hpp"
#include "mmdtest/statistic.hpp"

#include <Eigen/Eigenvalues>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace mmdtest {

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
}

// Every matrix in the moment formulas is I + a sigma S, so everything reduces
// to sums over the eigenvalues of S. For small sigma S the three blocks of
// V[Z] are O(1) while their sum is O((sigma S)^6), so sums and the final
// combination run in 113-bit precision. The eigenvalues themselves are used
// as exact inputs.
using Quad = boost::multiprecision::cpp_bin_float_quad;

class CovarianceSpectrum {
 public:
  CovarianceSpectrum(const GaussianParams& params, double sigma) : sigma_(sigma) {
    const double scale = params.cov().cwiseAbs().maxCoeff();
    if (scale > 0.0) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(params.cov(), Eigen::EigenvaluesOnly);
      values_ = eig.eigenvalues().cwiseMax(0.0);
    } else {
      values_ = Vector::Zero(params.dim());
    }
  }

  // log |I + a sigma S|
  Quad logdet(double a) const {
    Quad sum = 0;
    for (double s : values_) {
      if (s > 0.0) sum += boost::multiprecision::log1p(Quad(a) * sigma_ * s);
    }
    return sum;
  }

  // tr[((I + a sigma S)^{-1} S)^power]
  Quad trace(double a, int power) const {
    Quad sum = 0;
    for (double s : values_) {
      if (s > 0.0) sum += boost::multiprecision::pow(Quad(s) / (1 + Quad(a) * sigma_ * s), power);
    }
    return sum;
  }

 private:
  double sigma_;
  Vector values_;
};

double mean_from_spectrum(const CovarianceSpectrum& spec, double sigma) {
  // V + 2 sigma S = 2V - I = I + 4 sigma S.
  const Quad s = sigma;
  const Quad t = spec.trace(4.0, 1);
  const Quad t2 = spec.trace(4.0, 2);
  const Quad excess = 2 * s * t + 2 * s * s * t * t + 4 * s * s * t2;
  // 1 - exp(-logdet/2) (1 + excess)
  return static_cast<double>(-boost::multiprecision::expm1(boost::multiprecision::log1p(excess) -
                                                           spec.logdet(4.0) / 2));
}

double variance_from_spectrum(const CovarianceSpectrum& spec, double sigma) {
  using boost::multiprecision::exp;
  const Quad s = sigma;
  const Quad s2 = s * s;
  const Quad s4 = s2 * s2;

  const Quad first = 2 * exp(-spec.logdet(8.0) / 2);

  // V = I + 2 sigma S and V + 4 sigma S = I + 6 sigma S.
  const Quad a = spec.trace(2.0, 1);
  const Quad a2 = spec.trace(2.0, 2);
  const Quad b = spec.trace(6.0, 1);
  const Quad b2 = spec.trace(6.0, 2);
  const Quad middle_brace =
      1 + s2 * a * a / 2 + s2 * a2 + s2 * b * b / 2 + s2 * b2 + s * a - s * b - s2 * a * b;
  const Quad middle = 4 * exp(-(spec.logdet(2.0) + spec.logdet(6.0)) / 2) * middle_brace;

  // V + 2 sigma S = I + 4 sigma S.
  const Quad c2 = spec.trace(4.0, 2);
  const Quad c4 = spec.trace(4.0, 4);
  const Quad last_brace = 1 + 8 * s2 * c2 + 12 * s4 * c2 * c2 + 24 * s4 * c4;
  const Quad last = 2 * exp(-spec.logdet(4.0)) * last_brace;

  return static_cast<double>(first - middle + last);
}

}  // namespace

double asymptotic_mean(const GaussianParams& params, double sigma) {
  detail::require_sigma(sigma);
  return mean_from_spectrum(CovarianceSpectrum(params, sigma), sigma);
}

double asymptotic_variance(const GaussianParams& params, double sigma) {
  detail::require_sigma(sigma);
  return variance_from_spectrum(CovarianceSpectrum(params, sigma), sigma);
}

MomentPair asymptotic_moments(const GaussianParams& params, double sigma) {
  detail::require_sigma(sigma);
  const CovarianceSpectrum spec(params, sigma);
  return {mean_from_spectrum(spec, sigma), variance_from_spectrum(spec, sigma)};
}

ChiSqFit fit_chisq(const MomentPair& moments) {
  if (!(moments.e_z > 0.0) || !(moments.v_z > 0.0) || !std::isfinite(moments.e_z) ||
      !std::isfinite(moments.v_z)) {
    throw InvalidArgument("chi-squared fit needs positive finite moments");
  }
  return {moments.v_z / (2.0 * moments.e_z), 2.0 * moments.e_z * moments.e_z / moments.v_z};
}

std::optional<ChiSqFit> moment_fit(const GaussianParams& params, double sigma) {
  const MomentPair m = asymptotic_moments(params, sigma);
  if (!(m.e_z > 0.0) || !(m.v_z > 0.0)) return std::nullopt;
  return fit_chisq(m);
}

double chisq_quantile(const ChiSqFit& fit, double alpha) {
  require_alpha(alpha);
  // c chi^2_r is Gamma(shape r/2, scale 2c).
  return 2.0 * fit.c * gamma_upper_quantile(0.5 * fit.r, alpha);
}

double p_value(const ChiSqFit& fit, double statistic) {
  if (std::isnan(statistic)) throw InvalidArgument("statistic is NaN");
  if (statistic <= 0.0) return 1.0;
  return gamma_upper_tail(0.5 * fit.r, statistic / (2.0 * fit.c));
}

SpectralEstimate gram_spectrum(const GaussianParams& reference, double sigma, int l, Rng& rng,
                               SpectrumMode mode) {
  if (l < 2) throw InvalidArgument("gram_spectrum needs L >= 2");
  const EmbeddingContext ctx(reference, sigma);
  const Matrix points = MvnSampler(reference).sample(l, rng);
  const Matrix gram = f_inner_gram(ctx, points) / static_cast<double>(l);

  SpectralEstimate out;
  out.l = l;
  out.gram_trace = gram.trace();
  out.gram_sq_trace = gram.squaredNorm();
  if (mode == SpectrumMode::traces_only) return out;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericError("Gram eigensolver did not converge");
  const Vector& values = eig.eigenvalues();  // ascending
  const double top = values(values.size() - 1);
  out.min_raw_eigenvalue = values(0);
  if (out.min_raw_eigenvalue < -1e-8 * std::max(top, 0.0)) {
    throw NumericError("Gram matrix has an eigenvalue below -1e-8 * lambda_1");
  }
  out.eigenvalues.resize(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    out.eigenvalues[static_cast<std::size_t>(i)] = std::max(0.0, values(values.size() - 1 - i));
  }
  return out;
}

ChiSqFit approx_ii_fit(const SpectralEstimate& spec) {
  return fit_chisq({spec.gram_trace, 2.0 * spec.gram_sq_trace});
}

std::vector<double> spec_null_draws(const SpectralEstimate& spec, int draws, Rng& rng) {
  if (draws < 1000) throw InvalidArgument("spec draws must be >= 1000");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(static_cast<std::size_t>(draws));
  for (auto& value : out) {
    double sum = 0.0;
    for (double lambda : spec.eigenvalues) {
      const double z = normal(rng);
      sum += lambda * z * z;
    }
    value = sum;
  }
  std::sort(out.begin(), out.end());
  return out;
}

double spec_quantile(const SpectralEstimate& spec, double alpha, int draws, Rng& rng) {
  require_alpha(alpha);
  const auto sample = spec_null_draws(spec, draws, rng);
  return empirical_upper_quantile(sample, alpha);
}

double empirical_upper_quantile(std::span<const double> sorted, double alpha) {
  require_alpha(alpha);
  if (sorted.empty()) throw InvalidArgument("empirical quantile of an empty sample");
  const auto count = static_cast<double>(sorted.size());
  // The 1e-9 guard keeps exact products such as 0.95 * 2000 from rounding up.
  auto index = static_cast<std::size_t>(std::ceil((1.0 - alpha) * count - 1e-9));
  index = std::clamp<std::size_t>(index, 1, sorted.size());
  return sorted[index - 1];
}

double empirical_p_value(std::span<const double> sorted, double statistic) {
  const auto first = std::lower_bound(sorted.begin(), sorted.end(), statistic);
  const auto exceed = static_cast<double>(std::distance(first, sorted.end()));
  return (1.0 + exceed) / (static_cast<double>(sorted.size()) + 1.0);
}

namespace {

NullSimulation simulate_null(const GaussianParams& reference, Eigen::Index n, double sigma,
                             int iterations, std::uint64_t seed, bool with_fits) {
  if (iterations < 100) throw InvalidArgument("Monte-Carlo null needs iterations >= 100");
  if (n < 1) throw InvalidArgument("Monte-Carlo null needs n >= 1");
  detail::require_sigma(sigma);
  const MvnSampler sampler(reference);
  const auto count = static_cast<std::size_t>(iterations);

  NullSimulation sim;
  sim.statistics.resize(count);
  if (with_fits) sim.replication_fits.resize(count);
  parallel_for(count, [&](std::size_t i) {
    Rng rng = make_stream(seed, StreamPurpose::null_replication, i);
    const Dataset data(sampler.sample(n, rng));
    sim.statistics[i] = static_cast<double>(n) * mmd_sq_statistic(data, sigma);
    if (with_fits) sim.replication_fits[i] = moment_fit(sample_moments(data), sigma);
  });
  std::sort(sim.statistics.begin(), sim.statistics.end());
  return sim;
}

}  // namespace

std::vector<double> monte_carlo_null(const GaussianParams& reference, Eigen::Index n,
                                     double sigma, int iterations, std::uint64_t seed) {
  return simulate_null(reference, n, sigma, iterations, seed, false).statistics;
}

NullSimulation monte_carlo_null_with_fits(const GaussianParams& reference, Eigen::Index n,
                                          double sigma, int iterations, std::uint64_t seed) {
  return simulate_null(reference, n, sigma, iterations, seed, true);
}

double mean_replication_quantile(const NullSimulation& sim, double alpha) {
  double sum = 0.0;
  std::size_t used = 0;
  for (const auto& fit : sim.replication_fits) {
    if (!fit) continue;
    sum += chisq_quantile(*fit, alpha);
    ++used;
  }
  if (used == 0) throw NumericError("no replication produced a usable moment fit");
  return sum / static_cast<double>(used);
}

}  // namespace mmdtest
