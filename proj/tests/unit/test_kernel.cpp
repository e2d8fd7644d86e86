#include "mmdtest/error.hpp"
#include "mmdtest/kernel.hpp"
#include "mmdtest/random.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mmdtest;

namespace {

GaussianParams scalar_params(double mean, double var) {
  return GaussianParams(Vector::Constant(1, mean), Matrix::Constant(1, 1, var));
}

}  // namespace

TEST(GaussianKernel, ZeroDistanceIsOne) {
  std::mt19937_64 rng(3);
  const Vector x = oracle::random_vector(7, rng);
  EXPECT_EQ(gaussian_kernel(x, x, 1.0), 1.0);
}

TEST(GaussianKernel, HandValues) {
  EXPECT_NEAR(gaussian_kernel(Vector::Zero(1), Vector::Ones(1), 1.0), 0.3678794412, 1e-10);
  EXPECT_NEAR(gaussian_kernel(Vector::Zero(2), Vector::Ones(2), 0.5), std::exp(-1.0), 1e-15);
}

TEST(GaussianKernel, Symmetric) {
  std::mt19937_64 rng(4);
  const Vector x = oracle::random_vector(5, rng);
  const Vector y = oracle::random_vector(5, rng);
  EXPECT_EQ(gaussian_kernel(x, y, 0.3), gaussian_kernel(y, x, 0.3));
}

TEST(GaussianKernel, RejectsBadInput) {
  EXPECT_THROW(gaussian_kernel(Vector::Zero(2), Vector::Zero(3), 1.0), InvalidArgument);
  EXPECT_THROW(gaussian_kernel(Vector::Zero(2), Vector::Zero(2), 0.0), InvalidArgument);
  EXPECT_THROW(gaussian_kernel(Vector::Zero(2), Vector::Zero(2), -1.0), InvalidArgument);
}

TEST(EmbeddingContext, VMatrixInvariant) {
  std::mt19937_64 rng(5);
  const Matrix S = oracle::random_spd(6, rng);
  const double sigma = 0.7;
  const EmbeddingContext ctx(GaussianParams(Vector::Zero(6), S), sigma);
  const Matrix expected = Matrix::Identity(6, 6) + 2.0 * sigma * S;
  const double norm = S.operatorNorm();
  EXPECT_LT((ctx.v_matrix() - expected).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + 2.0 * sigma * norm));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(ctx.v_matrix());
  EXPECT_GE(eig.eigenvalues().minCoeff(), 1.0 - 1e-12);
  EXPECT_NEAR(ctx.logdet_v(), std::log(expected.determinant()), 1e-10);
  EXPECT_NEAR(ctx.logdet_v_plus(), std::log((2.0 * expected - Matrix::Identity(6, 6)).determinant()),
              1e-10);
}

TEST(EmbeddingContext, TracesMatchExplicitInverses) {
  std::mt19937_64 rng(6);
  const Matrix S = oracle::random_spd(4, rng);
  const double sigma = 0.4;
  const EmbeddingContext ctx(GaussianParams(Vector::Zero(4), S), sigma);
  const Matrix I = Matrix::Identity(4, 4);
  const Matrix vinv_s = (I + 2 * sigma * S).inverse() * S;
  const Matrix qs = (I + 4 * sigma * S).inverse() * S;
  EXPECT_NEAR(ctx.trace_vinv_cov(), vinv_s.trace(), 1e-12);
  EXPECT_NEAR(ctx.trace_vplus_inv_cov(), qs.trace(), 1e-12);
  EXPECT_NEAR(ctx.trace_vplus_inv_cov_sq(), (qs * qs).trace(), 1e-12);
}

TEST(EmbeddingContext, EmbeddingOnlyRefusesInnerProducts) {
  const EmbeddingContext ctx(GaussianParams::standard(2), 0.5, ContextDetail::embedding_only);
  EXPECT_FALSE(ctx.has_traces());
  EXPECT_THROW(point_terms(ctx, Matrix::Zero(3, 2)), InvalidArgument);
}

TEST(EmbedGaussian, ZeroCovarianceAtMean) {
  Vector m(3);
  m << 1.0, -2.0, 0.5;
  const EmbeddingContext ctx(GaussianParams(m, Matrix::Zero(3, 3)), 0.9);
  EXPECT_EQ(embed_gaussian(ctx, m), 1.0);
}

TEST(EmbedGaussian, ZeroCovarianceIsKernelAtMean) {
  std::mt19937_64 rng(7);
  const Vector m = oracle::random_vector(4, rng);
  const EmbeddingContext ctx(GaussianParams(m, Matrix::Zero(4, 4)), 0.35);
  for (int i = 0; i < 50; ++i) {
    const Vector p = oracle::random_vector(4, rng);
    EXPECT_NEAR(embed_gaussian(ctx, p), gaussian_kernel(p, m, 0.35), 1e-14);
  }
}

TEST(EmbedGaussian, ScalarValue) {
  const EmbeddingContext ctx(scalar_params(0.0, 1.0), 0.5);
  EXPECT_NEAR(embed_gaussian(ctx, Vector::Zero(1)), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(EmbedGaussian, MatchesIndependentGaussianIntegral) {
  std::mt19937_64 rng(8);
  const Matrix S = oracle::random_spd(3, rng);
  const Vector m = oracle::random_vector(3, rng);
  const EmbeddingContext ctx(GaussianParams(m, S), 0.6);
  const Vector p = oracle::random_vector(3, rng);
  EXPECT_NEAR(embed_gaussian(ctx, p),
              oracle::embedding_inner(p, Matrix::Zero(3, 3), m, S, 0.6), 1e-13);
}

TEST(EmbedGaussian, DimensionMismatch) {
  const EmbeddingContext ctx(GaussianParams::standard(2), 0.5);
  EXPECT_THROW(embed_gaussian(ctx, Vector::Zero(3)), InvalidArgument);
}

TEST(EmbeddingNormSq, Values) {
  EXPECT_EQ(embedding_norm_sq(GaussianParams(Vector::Zero(3), Matrix::Zero(3, 3)), 1.0), 1.0);
  EXPECT_NEAR(embedding_norm_sq(scalar_params(0.0, 1.0), 0.25), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(embedding_norm_sq(GaussianParams::standard(2), 0.5), 1.0 / 3.0, 1e-15);
}

TEST(EmbeddingNormSq, MatchesSelfInner) {
  std::mt19937_64 rng(9);
  const Matrix S = oracle::random_spd(5, rng);
  const Vector m = oracle::random_vector(5, rng);
  EXPECT_NEAR(embedding_norm_sq(GaussianParams(m, S), 0.2),
              oracle::embedding_inner(m, S, m, S, 0.2), 1e-13);
}

TEST(BMatrix, Values) {
  std::mt19937_64 rng(10);
  const Matrix S = oracle::random_spd(3, rng);
  const Vector m = oracle::random_vector(3, rng);
  const GaussianParams p(m, S);
  EXPECT_LT((b_matrix(m, p) + S).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(b_matrix(Vector::Constant(1, 2.0), scalar_params(0.0, 1.0))(0, 0), 3.0, 1e-15);
  for (int i = 0; i < 20; ++i) {
    const Vector x = oracle::random_vector(3, rng);
    const Matrix b = b_matrix(x, p);
    EXPECT_NEAR(b.trace(), (x - m).squaredNorm() - S.trace(), 1e-12);
    EXPECT_EQ((b - b.transpose()).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(FInner, HandValueInOneDimension) {
  // k = 1, V = 2, 2V - I = 3, B(0) = -1: 1 - 2.5/sqrt2 + 17/(12 sqrt3).
  const double hand = 1.0 - 2.5 / std::sqrt(2.0) + 17.0 / (12.0 * std::sqrt(3.0));
  const EmbeddingContext ctx(scalar_params(0.0, 1.0), 0.5);
  const double value = f_inner(ctx, Vector::Zero(1), Vector::Zero(1));
  EXPECT_NEAR(value, hand, 1e-15);
  EXPECT_NEAR(value, 0.050145928385600835, 1e-15);
}

TEST(FInner, MatchesLiteralTranscription) {
  std::mt19937_64 rng(11);
  for (int d : {1, 2, 3, 5, 8}) {
    const Matrix S = oracle::random_spd(d, rng);
    const Vector m = oracle::random_vector(d, rng);
    const double sigma = 0.1 + 0.4 * d / 8.0;
    const EmbeddingContext ctx(GaussianParams(m, S), sigma);
    for (int i = 0; i < 10; ++i) {
      const Vector x = m + oracle::random_vector(d, rng);
      const Vector y = m + oracle::random_vector(d, rng);
      EXPECT_NEAR(f_inner(ctx, x, y), oracle::literal_f_inner(x, y, m, S, sigma), 1e-12)
          << "d=" << d;
    }
  }
}

TEST(FInner, MatchesDerivativeConstruction) {
  std::mt19937_64 rng(12);
  for (int d : {1, 2, 4}) {
    const Matrix S = oracle::random_spd(d, rng);
    const Vector m = oracle::random_vector(d, rng);
    const double sigma = 0.3;
    const EmbeddingContext ctx(GaussianParams(m, S), sigma);
    for (int i = 0; i < 5; ++i) {
      const Vector x = m + oracle::random_vector(d, rng);
      const Vector y = m + oracle::random_vector(d, rng);
      EXPECT_NEAR(f_inner(ctx, x, y), oracle::derivative_f_inner(x, y, m, S, sigma), 1e-6)
          << "d=" << d;
    }
  }
}

TEST(FInner, SymmetricForRandomPsd) {
  std::mt19937_64 rng(13);
  const Matrix S = oracle::random_low_rank(6, 3, rng);
  const Vector m = oracle::random_vector(6, rng);
  const EmbeddingContext ctx(GaussianParams(m, S), 0.25);
  for (int i = 0; i < 100; ++i) {
    const Vector x = m + oracle::random_vector(6, rng);
    const Vector y = m + oracle::random_vector(6, rng);
    EXPECT_LT(std::abs(f_inner(ctx, x, y) - f_inner(ctx, y, x)), 1e-10);
  }
}

TEST(FInner, GramIsPsdAndMatchesPairwise) {
  std::mt19937_64 rng(14);
  const Matrix S = oracle::random_spd(4, rng);
  const Vector m = oracle::random_vector(4, rng);
  const GaussianParams p(m, S);
  const EmbeddingContext ctx(p, 0.3);
  Rng stream = make_stream(14, StreamPurpose::gram_sample);
  const Matrix points = MvnSampler(p).sample(50, stream);
  const Matrix gram = f_inner_gram(ctx, points);
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 50; ++j) {
      ASSERT_NEAR(gram(i, j), f_inner(ctx, points.row(i).transpose(), points.row(j).transpose()),
                  1e-11);
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8 * eig.eigenvalues().maxCoeff());
}

TEST(FInner, PointTermsMatchDirect) {
  std::mt19937_64 rng(15);
  const Matrix S = oracle::random_spd(3, rng);
  const EmbeddingContext ctx(GaussianParams(Vector::Zero(3), S), 0.5);
  const Matrix a = oracle::random_matrix(4, 3, rng);
  const Matrix b = oracle::random_matrix(5, 3, rng);
  const PointTerms ta = point_terms(ctx, a);
  const PointTerms tb = point_terms(ctx, b);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 5; ++j)
      EXPECT_NEAR(f_inner(ctx, ta, i, tb, j),
                  f_inner(ctx, a.row(i).transpose(), b.row(j).transpose()), 1e-14);
}

TEST(FInner, OrthogonalEquivariance) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + trial % 5;
    const Matrix S = oracle::random_spd(d, rng);
    const Vector m = oracle::random_vector(d, rng);
    const Matrix Q = oracle::random_orthogonal(d, rng);
    const Vector x = m + oracle::random_vector(d, rng);
    const Vector y = m + oracle::random_vector(d, rng);
    const EmbeddingContext ctx(GaussianParams(m, S), 0.3);
    const EmbeddingContext rotated(GaussianParams(Q * m, Q * S * Q.transpose()), 0.3);
    const double base = f_inner(ctx, x, y);
    const double turned = f_inner(rotated, Q * x, Q * y);
    EXPECT_LE(std::abs(base - turned), 1e-9 * std::max(1.0, std::abs(base)));
  }
}

TEST(FInner, TranslationEquivariance) {
  std::mt19937_64 rng(17);
  const Matrix S = oracle::random_spd(4, rng);
  const Vector m = oracle::random_vector(4, rng);
  const Vector t = 3.0 * oracle::random_vector(4, rng);
  const EmbeddingContext ctx(GaussianParams(m, S), 0.4);
  const EmbeddingContext moved(GaussianParams(m + t, S), 0.4);
  for (int i = 0; i < 20; ++i) {
    const Vector x = m + oracle::random_vector(4, rng);
    const Vector y = m + oracle::random_vector(4, rng);
    EXPECT_NEAR(f_inner(ctx, x, y), f_inner(moved, x + t, y + t), 1e-10);
  }
}

TEST(FInner, MeanZeroUnderReference) {
  // E_X f(X) = 0 under the reference, so E_X <f(X), f(y0)> = 0.
  std::mt19937_64 rng(18);
  for (int d : {1, 2, 3}) {
    const Matrix S = oracle::random_spd(d, rng);
    const Vector m = oracle::random_vector(d, rng);
    const GaussianParams p(m, S);
    const EmbeddingContext ctx(p, 0.5);
    const Vector y0 = m + oracle::random_vector(d, rng);
    const Eigen::Index draws = 1'000'000;
    Rng stream = make_stream(18 + d, StreamPurpose::gram_sample);
    const Matrix xs = MvnSampler(p).sample(draws, stream);
    const PointTerms tx = point_terms(ctx, xs);
    const PointTerms ty = point_terms(ctx, y0.transpose());
    double sum = 0.0, sum_sq = 0.0;
    for (Eigen::Index i = 0; i < draws; ++i) {
      const double v = f_inner(ctx, tx, i, ty, 0);
      sum += v;
      sum_sq += v * v;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
    EXPECT_LT(std::abs(mean), 3.0 * se) << "d=" << d;
  }
}

TEST(FInner, DegenerateCovarianceStillFactors) {
  const EmbeddingContext ctx(GaussianParams(Vector::Zero(5), Matrix::Zero(5, 5)), 2.0);
  EXPECT_TRUE(std::isfinite(f_inner(ctx, Vector::Ones(5), Vector::Zero(5))));
}
