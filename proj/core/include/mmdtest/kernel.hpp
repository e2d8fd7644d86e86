#pragma once

// Closed-form quantities for the Gaussian kernel k(x, y) = exp(-sigma ||x-y||^2)
// and Gaussian distributions N(m, S):
//
//   mean embedding   mu(x)   = |V|^{-1/2} exp(-sigma (x-m)^T V^{-1} (x-m)),  V = I + 2 sigma S
//   embedding norm   ||mu||^2 = |I + 4 sigma S|^{-1/2}
//   influence inner product <f(x), f(y)> of the centred feature
//     f(x) = k(., x) - mu(.) {1 + 2 sigma (. - m)^T V^{-1} (x - m) + sigma tr[...B(x)]}
//   with B(x) = (x - m)(x - m)^T - S.
//
// Every |M|^{-1/2} is exp(-logdet/2) from a Cholesky factor. V and 2V - I have
// eigenvalues >= 1, so factorization failure means the covariance was not PSD.

#include "mmdtest/types.hpp"

#include <Eigen/Cholesky>

namespace mmdtest {

double gaussian_kernel(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                       double sigma);

enum class ContextDetail {
  embedding_only,  // factors and log-determinants; enough for the statistic
  full,            // plus the traces required by f_inner
};

/// Immutable per-(params, sigma) cache of V = I + 2 sigma S, 2V - I = I + 4 sigma S,
/// their Cholesky factors and log-determinants, and the traces f_inner needs.
/// Safe to share across threads.
class EmbeddingContext {
 public:
  EmbeddingContext(GaussianParams params, double sigma,
                   ContextDetail detail = ContextDetail::full);

  const GaussianParams& params() const noexcept { return params_; }
  double sigma() const noexcept { return sigma_; }
  Eigen::Index dim() const noexcept { return params_.dim(); }

  const Matrix& v_matrix() const noexcept { return v_; }
  const Eigen::LLT<Matrix>& chol_v() const noexcept { return chol_v_; }
  double logdet_v() const noexcept { return logdet_v_; }
  const Eigen::LLT<Matrix>& chol_v_plus() const noexcept { return chol_v_plus_; }
  double logdet_v_plus() const noexcept { return logdet_v_plus_; }
  bool has_traces() const noexcept { return detail_ == ContextDetail::full; }

  /// tr[V^{-1} S]
  double trace_vinv_cov() const noexcept { return tr_vinv_cov_; }
  /// tr[(2V - I)^{-1} S]
  double trace_vplus_inv_cov() const noexcept { return tr_vplus_inv_cov_; }
  /// tr[((2V - I)^{-1} S)^2]
  double trace_vplus_inv_cov_sq() const noexcept { return tr_vplus_inv_cov_sq_; }

 private:
  GaussianParams params_;
  double sigma_;
  ContextDetail detail_;
  Matrix v_;
  Eigen::LLT<Matrix> chol_v_;
  double logdet_v_ = 0.0;
  Eigen::LLT<Matrix> chol_v_plus_;
  double logdet_v_plus_ = 0.0;
  double tr_vinv_cov_ = 0.0;
  double tr_vplus_inv_cov_ = 0.0;
  double tr_vplus_inv_cov_sq_ = 0.0;
};

/// mu(N(m, S))(point).
double embed_gaussian(const EmbeddingContext& ctx, const Eigen::Ref<const Vector>& point);

/// ||mu(N(m, S))||^2 = |I + 4 sigma S|^{-1/2}.
double embedding_norm_sq(const GaussianParams& params, double sigma);

/// (x - m)(x - m)^T - S.
Matrix b_matrix(const Eigen::Ref<const Vector>& x, const GaussianParams& params);

/// Per-point quantities from which <f(x_i), f(y_j)> is assembled in O(d) per
/// pair. Columns index points; u = x - m.
struct PointTerms {
  Matrix centered;   // u                      (d x N)
  Matrix solved_v;   // L_V^{-1} u             (d x N)
  Matrix solved_vp;  // L_{2V-I}^{-1} u        (d x N)
  Vector embed;      // mu(x)
  Vector quad_v;     // u^T V^{-1} u
  Vector quad_vsv;   // u^T V^{-1} S V^{-1} u
  Vector quad_vp;    // u^T (2V-I)^{-1} u
  Vector quad_vpsvp; // u^T (2V-I)^{-1} S (2V-I)^{-1} u

  Eigen::Index size() const noexcept { return centered.cols(); }
};

/// Terms for every row of `points` (N x d).
PointTerms point_terms(const EmbeddingContext& ctx, const Eigen::Ref<const Matrix>& points);

/// <f(a_i), f(b_j)> from precomputed terms.
double f_inner(const EmbeddingContext& ctx, const PointTerms& a, Eigen::Index i,
               const PointTerms& b, Eigen::Index j);

/// <f(x), f(y)> in the RKHS of the Gaussian kernel.
double f_inner(const EmbeddingContext& ctx, const Eigen::Ref<const Vector>& x,
               const Eigen::Ref<const Vector>& y);

/// Full N x N matrix [<f(x_i), f(x_j)>] for the rows of `points`, built with
/// three N x N x d products instead of N^2 separate evaluations.
Matrix f_inner_gram(const EmbeddingContext& ctx, const Eigen::Ref<const Matrix>& points);

namespace detail {
/// Log-determinant from a successful LLT factor.
double logdet(const Eigen::LLT<Matrix>& llt);
/// LLT of a matrix that is PD by construction; throws InternalInvariantError otherwise.
Eigen::LLT<Matrix> checked_llt(const Matrix& m, const char* what);
void require_sigma(double sigma);
}  // namespace detail

}  // namespace mmdtest
