#include "mmdtest/kernel.hpp"

#include "mmdtest/error.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

namespace mmdtest {

namespace detail {

double logdet(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Eigen::LLT<Matrix> checked_llt(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw InternalInvariantError(std::string("Cholesky of ") + what +
                                 " failed; covariance is not PSD");
  }
  return llt;
}

void require_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("kernel scale sigma must be positive and finite");
  }
}

}  // namespace detail

namespace {

void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch (" + std::to_string(got) +
                          " vs " + std::to_string(want) + ")");
  }
}

// L^{-1} S L^{-T} for symmetric S.
Matrix whiten(const Eigen::LLT<Matrix>& llt, const Matrix& s) {
  const auto lower = llt.matrixL();
  Matrix half = lower.solve(s);
  Matrix full = lower.solve(half.transpose());
  return (0.5 * (full + full.transpose())).eval();
}

// The four-term inner product, given the scalars of one (x, y) pair.
struct PairScalars {
  double sq_dist;       // ||x - y||^2
  double cross_v;       // u^T V^{-1} w
  double cross_vp;      // u^T (2V-I)^{-1} w
  double embed_x, embed_y;
  double quad_v_x, quad_v_y;
  double quad_vsv_x, quad_vsv_y;
  double quad_vp_x, quad_vp_y;
  double quad_vpsvp_x, quad_vpsvp_y;
};

double combine(const EmbeddingContext& ctx, const PairScalars& p) {
  const double s = ctx.sigma();
  const double tr_vs = ctx.trace_vinv_cov();
  const double tr_qs = ctx.trace_vplus_inv_cov();
  const double tr_qsqs = ctx.trace_vplus_inv_cov_sq();

  const double kernel = std::exp(-s * p.sq_dist);

  // |V|^{-1/2} e^{-s u'V^-1 u} {1 + 2s u'V^-1 w + s tr[V^-1 (2s uu' V^-1 - I) B(y)]}
  const double lin = 1.0 + 2.0 * s * p.cross_v;
  const double cross_x =
      p.embed_x * (lin + s * (2.0 * s * p.cross_v * p.cross_v - 2.0 * s * p.quad_vsv_x -
                              p.quad_v_y + tr_vs));
  const double cross_y =
      p.embed_y * (lin + s * (2.0 * s * p.cross_v * p.cross_v - 2.0 * s * p.quad_vsv_y -
                              p.quad_v_x + tr_vs));

  // |2V-I|^{-1/2} {1 + s tr[(2uw' - B(x) - B(y)) Q] + s^2 (tr[B(x)Q] tr[B(y)Q] + 2 tr[B(x)QB(y)Q])}
  const double b_x = p.quad_vp_x - tr_qs;
  const double b_y = p.quad_vp_y - tr_qs;
  const double bqbq =
      p.cross_vp * p.cross_vp - p.quad_vpsvp_x - p.quad_vpsvp_y + tr_qsqs;
  const double brace = 1.0 + s * (2.0 * p.cross_vp - p.quad_vp_x - p.quad_vp_y + 2.0 * tr_qs) +
                       s * s * (b_x * b_y + 2.0 * bqbq);
  const double tail = std::exp(-0.5 * ctx.logdet_v_plus()) * brace;

  return kernel - cross_x - cross_y + tail;
}

}  // namespace

double gaussian_kernel(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                       double sigma) {
  require_dim(x.size(), y.size(), "gaussian_kernel");
  detail::require_sigma(sigma);
  return std::exp(-sigma * (x - y).squaredNorm());
}

EmbeddingContext::EmbeddingContext(GaussianParams params, double sigma, ContextDetail detail)
    : params_(std::move(params)), sigma_(sigma), detail_(detail) {
  detail::require_sigma(sigma);
  const auto d = params_.dim();
  const Matrix& cov = params_.cov();
  const Matrix identity = Matrix::Identity(d, d);

  v_ = identity + 2.0 * sigma * cov;
  chol_v_ = detail::checked_llt(v_, "V = I + 2 sigma S");
  logdet_v_ = detail::logdet(chol_v_);

  chol_v_plus_ = detail::checked_llt(identity + 4.0 * sigma * cov, "2V - I = I + 4 sigma S");
  logdet_v_plus_ = detail::logdet(chol_v_plus_);
  if (detail_ == ContextDetail::embedding_only) return;

  tr_vinv_cov_ = whiten(chol_v_, cov).trace();
  const Matrix w_plus = whiten(chol_v_plus_, cov);
  tr_vplus_inv_cov_ = w_plus.trace();
  tr_vplus_inv_cov_sq_ = w_plus.squaredNorm();
}

double embed_gaussian(const EmbeddingContext& ctx, const Eigen::Ref<const Vector>& point) {
  require_dim(point.size(), ctx.dim(), "embed_gaussian");
  const Vector solved = ctx.chol_v().matrixL().solve(point - ctx.params().mean());
  return std::exp(-0.5 * ctx.logdet_v() - ctx.sigma() * solved.squaredNorm());
}

double embedding_norm_sq(const GaussianParams& params, double sigma) {
  detail::require_sigma(sigma);
  const auto d = params.dim();
  const auto llt =
      detail::checked_llt(Matrix::Identity(d, d) + 4.0 * sigma * params.cov(), "I + 4 sigma S");
  return std::exp(-0.5 * detail::logdet(llt));
}

Matrix b_matrix(const Eigen::Ref<const Vector>& x, const GaussianParams& params) {
  require_dim(x.size(), params.dim(), "b_matrix");
  const Vector u = x - params.mean();
  return u * u.transpose() - params.cov();
}

PointTerms point_terms(const EmbeddingContext& ctx, const Eigen::Ref<const Matrix>& points) {
  require_dim(points.cols(), ctx.dim(), "point_terms");
  if (!ctx.has_traces()) {
    throw InvalidArgument("point_terms: EmbeddingContext built without f_inner traces");
  }
  const Matrix& cov = ctx.params().cov();
  const double s = ctx.sigma();

  PointTerms t;
  t.centered = (points.rowwise() - ctx.params().mean().transpose()).transpose();
  t.solved_v = ctx.chol_v().matrixL().solve(t.centered);
  t.solved_vp = ctx.chol_v_plus().matrixL().solve(t.centered);

  t.quad_v = t.solved_v.colwise().squaredNorm().transpose();
  t.quad_vp = t.solved_vp.colwise().squaredNorm().transpose();

  const Matrix vinv_u = ctx.chol_v().matrixU().solve(t.solved_v);
  t.quad_vsv = (vinv_u.array() * (cov * vinv_u).array()).colwise().sum().transpose();
  const Matrix vpinv_u = ctx.chol_v_plus().matrixU().solve(t.solved_vp);
  t.quad_vpsvp = (vpinv_u.array() * (cov * vpinv_u).array()).colwise().sum().transpose();

  t.embed = (-0.5 * ctx.logdet_v() - s * t.quad_v.array()).exp().matrix();
  return t;
}

double f_inner(const EmbeddingContext& ctx, const PointTerms& a, Eigen::Index i,
               const PointTerms& b, Eigen::Index j) {
  PairScalars p{};
  p.sq_dist = (a.centered.col(i) - b.centered.col(j)).squaredNorm();
  p.cross_v = a.solved_v.col(i).dot(b.solved_v.col(j));
  p.cross_vp = a.solved_vp.col(i).dot(b.solved_vp.col(j));
  p.embed_x = a.embed(i);
  p.embed_y = b.embed(j);
  p.quad_v_x = a.quad_v(i);
  p.quad_v_y = b.quad_v(j);
  p.quad_vsv_x = a.quad_vsv(i);
  p.quad_vsv_y = b.quad_vsv(j);
  p.quad_vp_x = a.quad_vp(i);
  p.quad_vp_y = b.quad_vp(j);
  p.quad_vpsvp_x = a.quad_vpsvp(i);
  p.quad_vpsvp_y = b.quad_vpsvp(j);
  return combine(ctx, p);
}

double f_inner(const EmbeddingContext& ctx, const Eigen::Ref<const Vector>& x,
               const Eigen::Ref<const Vector>& y) {
  require_dim(x.size(), ctx.dim(), "f_inner");
  require_dim(y.size(), ctx.dim(), "f_inner");
  Matrix points(2, ctx.dim());
  points.row(0) = x.transpose();
  points.row(1) = y.transpose();
  const PointTerms t = point_terms(ctx, points);
  const double value = f_inner(ctx, t, 0, t, 1);
#ifndef NDEBUG
  const double mirrored = f_inner(ctx, t, 1, t, 0);
  assert(std::abs(value - mirrored) <= 1e-9 * (1.0 + std::abs(value)));
#endif
  return value;
}

Matrix f_inner_gram(const EmbeddingContext& ctx, const Eigen::Ref<const Matrix>& points) {
  const PointTerms t = point_terms(ctx, points);
  const auto count = t.size();

  Matrix cross_v(count, count);
  cross_v.setZero();
  cross_v.selfadjointView<Eigen::Lower>().rankUpdate(t.solved_v.transpose());
  Matrix cross_vp(count, count);
  cross_vp.setZero();
  cross_vp.selfadjointView<Eigen::Lower>().rankUpdate(t.solved_vp.transpose());
  Matrix gram_u(count, count);
  gram_u.setZero();
  gram_u.selfadjointView<Eigen::Lower>().rankUpdate(t.centered.transpose());
  const Vector sq_norm = t.centered.colwise().squaredNorm().transpose();

  Matrix out(count, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    for (Eigen::Index i = j; i < count; ++i) {
      PairScalars p{};
      p.sq_dist = std::max(0.0, sq_norm(i) + sq_norm(j) - 2.0 * gram_u(i, j));
      p.cross_v = cross_v(i, j);
      p.cross_vp = cross_vp(i, j);
      p.embed_x = t.embed(i);
      p.embed_y = t.embed(j);
      p.quad_v_x = t.quad_v(i);
      p.quad_v_y = t.quad_v(j);
      p.quad_vsv_x = t.quad_vsv(i);
      p.quad_vsv_y = t.quad_vsv(j);
      p.quad_vp_x = t.quad_vp(i);
      p.quad_vp_y = t.quad_vp(j);
      p.quad_vpsvp_x = t.quad_vpsvp(i);
      p.quad_vpsvp_y = t.quad_vpsvp(j);
      if (i == j) p.sq_dist = 0.0;
      const double value = combine(ctx, p);
      out(i, j) = value;
      out(j, i) = value;
    }
  }
  return out;
}

}  // namespace mmdtest
