#include "mmdtest/kernel.hpp"
#include "mmdtest/null_approx.hpp"
#include "mmdtest/random.hpp"
#include "mmdtest/simulation.hpp"
#include "mmdtest/statistic.hpp"

#include <benchmark/benchmark.h>

using namespace mmdtest;

namespace {

Dataset normal_dataset(Eigen::Index n, Eigen::Index d) {
  Rng rng = make_stream(1, StreamPurpose::dataset);
  return sample_mvn(GaussianParams::standard(d), n, rng);
}

void BM_Statistic(benchmark::State& state) {
  const Dataset data = normal_dataset(state.range(0), state.range(1));
  const double sigma = 1.0 / static_cast<double>(data.d());
  for (auto _ : state) benchmark::DoNotOptimize(mmd_sq_statistic(data, sigma));
}
BENCHMARK(BM_Statistic)->Args({200, 10})->Args({500, 10})->Args({200, 300})->Args({500, 300})
    ->Unit(benchmark::kMillisecond);

// Covariance, closed-form moments and the fitted quantile.
void BM_MomentQuantile(benchmark::State& state) {
  const Dataset data = normal_dataset(500, state.range(0));
  const double sigma = 1.0 / static_cast<double>(data.d());
  for (auto _ : state) {
    benchmark::DoNotOptimize(chisq_quantile(*moment_fit(sample_moments(data), sigma), 0.05));
  }
}
BENCHMARK(BM_MomentQuantile)->Arg(10)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_GramSpectrum(benchmark::State& state) {
  const GaussianParams estimate = sample_moments(normal_dataset(500, state.range(1)));
  const double sigma = 1.0 / static_cast<double>(estimate.dim());
  const auto mode = state.range(2) ? SpectrumMode::full : SpectrumMode::traces_only;
  for (auto _ : state) {
    Rng rng = make_stream(2, StreamPurpose::gram_sample);
    benchmark::DoNotOptimize(gram_spectrum(estimate, sigma, static_cast<int>(state.range(0)), rng, mode));
  }
}
BENCHMARK(BM_GramSpectrum)
    ->Args({1000, 10, 0})
    ->Args({500, 10, 1})
    ->Args({1000, 300, 0})
    ->Args({500, 300, 1})
    ->Unit(benchmark::kMillisecond);

void BM_MonteCarloNull(benchmark::State& state) {
  const auto reference = GaussianParams::standard(state.range(1));
  const double sigma = 1.0 / static_cast<double>(reference.dim());
  for (auto _ : state) {
    benchmark::DoNotOptimize(monte_carlo_null(reference, state.range(0), sigma, 100, 3));
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_MonteCarloNull)->Args({500, 10})->Args({200, 300})->Unit(benchmark::kMillisecond);

void BM_FInnerPair(benchmark::State& state) {
  const Eigen::Index d = state.range(0);
  const EmbeddingContext ctx(sample_moments(normal_dataset(200, d)), 1.0 / static_cast<double>(d));
  Rng rng = make_stream(4, StreamPurpose::gram_sample);
  const Matrix pts = standard_normal_matrix(2, d, rng);
  const PointTerms terms = point_terms(ctx, pts);
  for (auto _ : state) benchmark::DoNotOptimize(f_inner(ctx, terms, 0, terms, 1));
}
BENCHMARK(BM_FInnerPair)->Arg(10)->Arg(300);

}  // namespace

BENCHMARK_MAIN();
