#pragma once

namespace mmdtest {

/// Regularized upper incomplete gamma Q(shape, x) = Gamma(shape, x) / Gamma(shape).
double gamma_upper_tail(double shape, double x);

/// x such that Q(shape, x) = tail, for tail in (0, 1).
double gamma_upper_quantile(double shape, double tail);

}  // namespace mmdtest
