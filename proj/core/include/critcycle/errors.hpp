#pragma once

#include <stdexcept>
#include <string>

namespace critcycle {

/// Raised when a covariance matrix violates symmetry or the uncertainty relation.
class UnphysicalStateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for out-of-range arguments (negative occupations, bad times, oversized steps, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an integration produces non-finite values or an ill-conditioned derivative.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace critcycle
