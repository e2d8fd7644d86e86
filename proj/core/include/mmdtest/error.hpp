#pragma once

#include <stdexcept>
#include <string>

namespace mmdtest {

/// Caller supplied something outside an operation's domain (dimension
/// mismatch, empty dataset, non-finite entries, alpha outside (0,1)).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The data carries no usable spread, e.g. all points identical when the
/// median bandwidth is requested.
class DegenerateData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative routine failed to converge or a roundoff audit tripped.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A factorization that cannot fail for valid inputs did fail.
class InternalInvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mmdtest
