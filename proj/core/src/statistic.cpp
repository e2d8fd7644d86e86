#include "mmdtest/statistic.hpp"

#include "mmdtest/error.hpp"
#include "mmdtest/kernel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace mmdtest {

namespace {

Matrix centered_rows(const Matrix& values, const Vector& mean) {
  return values.rowwise() - mean.transpose();
}

// Lower triangle of C C^T.
Matrix lower_gram(const Matrix& centered) {
  const auto n = centered.rows();
  Matrix gram = Matrix::Zero(n, n);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(centered);
  return gram;
}

double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw InvalidArgument("bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

GaussianParams sample_moments(const Dataset& data) {
  const Matrix& y = data.values();
  const auto n = static_cast<double>(data.n());
  Vector mean = y.colwise().mean().transpose();
  const Matrix c = centered_rows(y, mean);
  Matrix cov = Matrix::Zero(data.d(), data.d());
  cov.selfadjointView<Eigen::Lower>().rankUpdate(c.transpose(), 1.0 / n);
  cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
  return GaussianParams(std::move(mean), std::move(cov), GaussianParams::psd_by_construction);
}

StatisticTerms mmd_sq_terms(const Dataset& data, double sigma) {
  detail::require_sigma(sigma);
  const GaussianParams moments = sample_moments(data);
  const EmbeddingContext ctx(moments, sigma, ContextDetail::embedding_only);

  const auto n = data.n();
  const Matrix c = centered_rows(data.values(), moments.mean());

  // Pairwise kernel sum, diagonal terms are exactly 1.
  const Matrix gram = lower_gram(c);
  const Vector sq_norm = gram.diagonal();
  double off_diagonal = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double dist = std::max(0.0, sq_norm(i) + sq_norm(j) - 2.0 * gram(i, j));
      off_diagonal += std::exp(-sigma * dist);
    }
  }
  const double nn = static_cast<double>(n);
  const double kernel_mean = (nn + 2.0 * off_diagonal) / (nn * nn);

  // Embedding of N(m_hat, S_hat) evaluated at every sample.
  const Matrix solved = ctx.chol_v().matrixL().solve(c.transpose());
  const Vector quad = solved.colwise().squaredNorm().transpose();
  const double embed_sum = (-0.5 * ctx.logdet_v() - sigma * quad.array()).exp().sum();
  const double cross_mean = 2.0 * embed_sum / nn;

  return {kernel_mean, cross_mean, std::exp(-0.5 * ctx.logdet_v_plus())};
}

double mmd_sq_statistic(const Dataset& data, double sigma) {
  return std::max(0.0, mmd_sq_terms(data, sigma).raw());
}

double bandwidth_median(const Dataset& data) {
  const auto n = data.n();
  if (n < 2) throw InvalidArgument("median bandwidth needs at least two observations");
  const Vector mean = data.values().colwise().mean().transpose();
  const Matrix c = centered_rows(data.values(), mean);
  const Matrix gram = lower_gram(c);
  const Vector sq_norm = gram.diagonal();

  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      dist.push_back(std::max(0.0, sq_norm(i) + sq_norm(j) - 2.0 * gram(i, j)));
    }
  }
  const auto mid = dist.begin() + static_cast<std::ptrdiff_t>((dist.size() - 1) / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  if (!(*mid > 0.0)) {
    throw DegenerateData("median pairwise squared distance is zero; cannot set bandwidth");
  }
  return 1.0 / *mid;
}

double bandwidth_dim_power(Eigen::Index d, double exponent) {
  if (d < 1) throw InvalidArgument("dimension must be >= 1");
  if (!std::isfinite(exponent)) throw InvalidArgument("exponent must be finite");
  return std::pow(static_cast<double>(d), -exponent);
}

BandwidthSpec parse_bandwidth(std::string_view text) {
  if (text == "median") return BandwidthSpec::median();
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw InvalidArgument("bandwidth must be 'median', 'dim-power:<e>' or 'explicit:<sigma>'");
  }
  const auto head = text.substr(0, colon);
  const auto tail = text.substr(colon + 1);
  if (head == "dim-power") return BandwidthSpec::dim_power(parse_double(tail, "exponent"));
  if (head == "explicit") {
    const double sigma = parse_double(tail, "sigma");
    if (!(sigma > 0.0)) throw InvalidArgument("explicit sigma must be positive");
    return BandwidthSpec::fixed(sigma);
  }
  throw InvalidArgument("unknown bandwidth rule '" + std::string(head) + "'");
}

std::string format_bandwidth(const BandwidthSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  switch (spec.rule) {
    case BandwidthRule::median_heuristic: return "median";
    case BandwidthRule::dim_power: out << "dim-power:" << spec.parameter; break;
    case BandwidthRule::explicit_value: out << "explicit:" << spec.parameter; break;
  }
  return out.str();
}

KernelConfig resolve_kernel(const BandwidthSpec& spec, const Dataset& data) {
  if (spec.rule == BandwidthRule::median_heuristic) {
    return {bandwidth_median(data), BandwidthRule::median_heuristic, 0.0};
  }
  return resolve_kernel(spec, data.d());
}

KernelConfig resolve_kernel(const BandwidthSpec& spec, Eigen::Index d) {
  switch (spec.rule) {
    case BandwidthRule::median_heuristic:
      throw InvalidArgument("median bandwidth needs data");
    case BandwidthRule::dim_power:
      return {bandwidth_dim_power(d, spec.parameter), BandwidthRule::dim_power, spec.parameter};
    case BandwidthRule::explicit_value:
      detail::require_sigma(spec.parameter);
      return {spec.parameter, BandwidthRule::explicit_value, 0.0};
  }
  throw InvalidArgument("unknown bandwidth rule");
}

}  // namespace mmdtest
