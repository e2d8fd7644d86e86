#include "mmdtest/error.hpp"
#include "mmdtest/null_approx.hpp"
#include "mmdtest/parallel.hpp"
#include "mmdtest/random.hpp"
#include "mmdtest/simulation.hpp"
#include "mmdtest/statistic.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mmdtest;

namespace {

// Entrywise |sample cov - target| <= 3 standard errors, with the standard error
// of each product estimated from the draws themselves.
void expect_covariance(const Matrix& draws, const Matrix& target) {
  const auto n = draws.rows();
  const Vector mean = draws.colwise().mean().transpose();
  for (Eigen::Index a = 0; a < draws.cols(); ++a) {
    EXPECT_LT(std::abs(mean(a)), 3.0 * std::sqrt(target(a, a) / n) + 1e-12) << "mean " << a;
    for (Eigen::Index b = a; b < draws.cols(); ++b) {
      const Eigen::ArrayXd prod = draws.col(a).array() * draws.col(b).array();
      const double est = prod.mean();
      const double se = std::sqrt((prod - est).square().sum() / (n - 1) / n);
      EXPECT_LT(std::abs(est - target(a, b)), 3.0 * se + 1e-12) << a << "," << b;
    }
  }
}

}  // namespace

TEST(SampleMvn, ZeroCovariance) {
  Vector m(3);
  m << 1.0, 2.0, -3.0;
  Rng rng = make_stream(1, StreamPurpose::dataset);
  const Dataset data = sample_mvn(GaussianParams(m, Matrix::Zero(3, 3)), 10, rng);
  for (Eigen::Index i = 0; i < 10; ++i) EXPECT_EQ(data.values().row(i), m.transpose());
}

TEST(SampleMvn, IdentityCovarianceByLln) {
  Rng rng = make_stream(2, StreamPurpose::dataset);
  const Dataset data = sample_mvn(GaussianParams::standard(2), 100000, rng);
  expect_covariance(data.values(), Matrix::Identity(2, 2));
}

TEST(SampleMvn, SingularCovarianceUsesSymmetricRoot) {
  std::mt19937_64 r(3);
  const Matrix S = oracle::random_low_rank(4, 2, r);
  const GaussianParams p(Vector::Zero(4), S);
  const MvnSampler sampler(p);
  EXPECT_LT((sampler.factor() * sampler.factor().transpose() - S).cwiseAbs().maxCoeff(), 1e-10);
  Rng rng = make_stream(3, StreamPurpose::dataset);
  expect_covariance(sampler.sample(100000, rng), S);
}

TEST(SampleMvn, Deterministic) {
  std::mt19937_64 r(4);
  const GaussianParams p(oracle::random_vector(3, r), oracle::random_spd(3, r));
  Rng a = make_stream(4, StreamPurpose::dataset);
  Rng b = make_stream(4, StreamPurpose::dataset);
  EXPECT_EQ(sample_mvn(p, 50, a).values(), sample_mvn(p, 50, b).values());
  Rng c = make_stream(5, StreamPurpose::dataset);
  Rng d = make_stream(4, StreamPurpose::gram_sample);
  const Matrix base = sample_mvn(p, 50, a).values();
  EXPECT_NE(sample_mvn(p, 50, c).values(), base);
  EXPECT_NE(sample_mvn(p, 50, d).values(), base);
}

TEST(Alternatives, UniformSupportAndMoments) {
  Rng rng = make_stream(5, StreamPurpose::alternative_replication);
  const Dataset data = sample_alternative({Family::uniform_std, 2, Correlation::independent}, 100000, rng);
  EXPECT_LE(data.values().cwiseAbs().maxCoeff(), std::sqrt(3.0) + 1e-12);
  expect_covariance(data.values(), Matrix::Identity(2, 2));
}

TEST(Alternatives, ExponentialSupportAndMoments) {
  Rng rng = make_stream(6, StreamPurpose::alternative_replication);
  const Dataset data =
      sample_alternative({Family::exponential_std, 2, Correlation::independent}, 100000, rng);
  EXPECT_GE(data.values().minCoeff(), -1.0);
  expect_covariance(data.values(), Matrix::Identity(2, 2));
}

TEST(Alternatives, BandedCovariance) {
  const Matrix R = banded_correlation(10);
  EXPECT_EQ(R(0, 0), 1.0);
  EXPECT_EQ(R(0, 1), 0.5);
  EXPECT_EQ(R(2, 7), std::pow(0.5, 5));
  EXPECT_EQ(R(1, 7), 0.0);
  const Matrix root = banded_correlation_root(10);
  EXPECT_LT((root * root - R).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((root - root.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  for (Family f : {Family::exponential_std, Family::uniform_std, Family::gaussian}) {
    Rng rng = make_stream(7, StreamPurpose::alternative_replication);
    const Dataset data = sample_alternative({f, 10, Correlation::banded_geometric}, 100000, rng);
    expect_covariance(data.values(), R);
  }
}

TEST(Alternatives, BandedPsdForStudyDimensions) {
  for (Eigen::Index d : {10, 50, 100, 300}) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(banded_correlation(d));
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0) << d;
  }
}

TEST(Alternatives, Names) {
  for (Family f : {Family::gaussian, Family::uniform_std, Family::exponential_std})
    EXPECT_EQ(parse_family(to_string(f)), f);
  for (Correlation c : {Correlation::independent, Correlation::banded_geometric})
    EXPECT_EQ(parse_correlation(to_string(c)), c);
  EXPECT_EQ(parse_family("normal"), Family::gaussian);
  EXPECT_FALSE(parse_family("cauchy").has_value());
}

TEST(DMetric, Definition) {
  const std::vector<double> a{1.0, 2.0, 3.0}, b{1.5, 2.0, 2.0};
  EXPECT_DOUBLE_EQ(d_metric(a, b), 1.5);
  EXPECT_EQ(d_metric(a, a), 0.0);
  EXPECT_THROW(d_metric(a, std::vector<double>{1.0}), InvalidArgument);
}

TEST(AccuracyExperiment, EmptyEngineList) {
  AccuracyOptions opt;
  opt.iterations = 500;
  const auto rep = accuracy_experiment(3, 50, 0.3, {}, opt, 1);
  EXPECT_TRUE(rep.engines.empty());
  ASSERT_EQ(rep.reference_quantiles.size(), 3u);
  EXPECT_GE(rep.reference_quantiles[2], rep.reference_quantiles[1]);
  EXPECT_GE(rep.reference_quantiles[1], rep.reference_quantiles[0]);
}

TEST(AccuracyExperiment, AllEnginesSmall) {
  AccuracyOptions opt;
  opt.iterations = 500;
  opt.l_ii = 200;
  opt.l_spec = 100;
  opt.spec_draws = 2000;
  opt.mc_iterations = 200;
  opt.timing_runs = 1;
  const std::vector<Engine> engines{Engine::moment_chisq, Engine::gram_chisq, Engine::spec_sum,
                                    Engine::monte_carlo};
  const auto rep = accuracy_experiment(4, 100, 0.25, engines, opt, 2);
  ASSERT_EQ(rep.engines.size(), 4u);
  for (const auto& e : rep.engines) {
    ASSERT_EQ(e.quantiles.size(), 3u);
    EXPECT_GE(e.d_metric, 0.0);
    EXPECT_DOUBLE_EQ(e.d_metric, d_metric(e.quantiles, rep.reference_quantiles));
    // Every approximation should land in the right neighbourhood.
    EXPECT_LT(std::abs(e.quantiles[1] - rep.reference_quantiles[1]),
              0.25 * rep.reference_quantiles[1])
        << to_string(e.engine);
  }
  EXPECT_THROW(accuracy_experiment(4, 100, 0.25, engines, AccuracyOptions{.iterations = 499}, 2),
               InvalidArgument);
}

TEST(AccuracyExperiment, PerReplicationMode) {
  AccuracyOptions opt;
  opt.iterations = 500;
  opt.moment_mode = MomentMode::per_replication;
  opt.timing_runs = 1;
  const std::vector<Engine> engines{Engine::moment_chisq};
  const auto rep = accuracy_experiment(3, 80, 0.3, engines, opt, 3);
  const auto sim = monte_carlo_null_with_fits(GaussianParams::standard(3), 80, 0.3, 500, 3);
  EXPECT_NEAR(rep.engines[0].quantiles[1], mean_replication_quantile(sim, 0.05), 1e-12);
}

TEST(PowerExperiment, NullSizeNearLevel) {
  PowerOptions opt;
  opt.replications = 400;
  opt.null_iterations = 1000;
  const auto rep = power_experiment({Family::gaussian, 3, Correlation::independent}, 100,
                                    KernelConfig{1.0 / 3.0}, opt, 4);
  EXPECT_EQ(rep.replications, 400);
  EXPECT_DOUBLE_EQ(rep.power, rep.rejections / 400.0);
  ASSERT_TRUE(rep.threshold.has_value());
  // binomial 99% band around 0.05 widened for the threshold's own noise
  EXPECT_GT(rep.power, 0.05 - 2.58 * std::sqrt(0.05 * 0.95 / 400) - 0.02);
  EXPECT_LT(rep.power, 0.05 + 2.58 * std::sqrt(0.05 * 0.95 / 400) + 0.02);
}

TEST(PowerExperiment, MomentThresholdSource) {
  PowerOptions opt;
  opt.replications = 100;
  opt.threshold_source = ThresholdSource::moment_chisq;
  const auto rep = power_experiment({Family::exponential_std, 5, Correlation::independent}, 200,
                                    KernelConfig{0.2}, opt, 5);
  EXPECT_FALSE(rep.threshold.has_value());
  EXPECT_GT(rep.power, 0.9);
}

TEST(PowerExperiment, Preconditions) {
  PowerOptions opt;
  opt.replications = 99;
  EXPECT_THROW(power_experiment({}, 10, KernelConfig{1.0}, opt, 0), InvalidArgument);
}

TEST(PowerExperiment, NondecreasingInN) {
  PowerOptions opt;
  opt.replications = 200;
  opt.null_iterations = 500;
  const AlternativeSpec spec{Family::exponential_std, 20, Correlation::independent};
  double previous = 0.0;
  for (Eigen::Index n : {20, 40, 80}) {
    const auto rep = power_experiment(spec, n, KernelConfig{0.05}, opt, 6);
    const double slack = 2.0 * std::sqrt(std::max(rep.power * (1 - rep.power), 0.01) / 200.0);
    EXPECT_GE(rep.power + slack, previous) << n;
    previous = rep.power;
  }
}

TEST(Reproducibility, IndependentOfThreadCount) {
  const auto p = GaussianParams::standard(3);
  set_max_threads(1);
  const auto one = monte_carlo_null(p, 60, 0.3, 200, 42);
  AccuracyOptions opt;
  opt.iterations = 500;
  opt.l_ii = 100;
  opt.l_spec = 100;
  opt.spec_draws = 1000;
  opt.mc_iterations = 100;
  opt.timing_runs = 1;
  const std::vector<Engine> engines{Engine::moment_chisq, Engine::gram_chisq, Engine::spec_sum,
                                    Engine::monte_carlo};
  const auto acc_one = accuracy_experiment(3, 60, 0.3, engines, opt, 42);
  set_max_threads(4);
  const auto four = monte_carlo_null(p, 60, 0.3, 200, 42);
  const auto acc_four = accuracy_experiment(3, 60, 0.3, engines, opt, 42);
  set_max_threads(0);
  EXPECT_EQ(one, four);
  EXPECT_EQ(acc_one.reference_quantiles, acc_four.reference_quantiles);
  for (std::size_t i = 0; i < engines.size(); ++i)
    EXPECT_EQ(acc_one.engines[i].quantiles, acc_four.engines[i].quantiles);
}

TEST(Parallel, RethrowsAndCoversRange) {
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10,
                            [](std::size_t i) {
                              if (i == 7) throw NumericError("boom");
                            }),
               NumericError);
}
