#include "mmdtest/special.hpp"

#include "mmdtest/error.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <string>

namespace mmdtest {

double gamma_upper_tail(double shape, double x) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw InvalidArgument("gamma shape must be positive and finite");
  }
  if (std::isnan(x)) throw InvalidArgument("gamma argument is NaN");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  try {
    return boost::math::gamma_q(shape, x);
  } catch (const std::exception& e) {
    throw NumericError(std::string("upper incomplete gamma failed: ") + e.what());
  }
}

double gamma_upper_quantile(double shape, double tail) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw InvalidArgument("gamma shape must be positive and finite");
  }
  if (!(tail > 0.0 && tail < 1.0)) throw InvalidArgument("tail probability must be in (0, 1)");
  try {
    return boost::math::gamma_q_inv(shape, tail);
  } catch (const std::exception& e) {
    throw NumericError(std::string("inverse upper incomplete gamma failed: ") + e.what());
  }
}

}  // namespace mmdtest
