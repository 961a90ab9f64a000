#pragma once

#include <stdexcept>
#include <string>

namespace polymer {

/// Invalid configuration or model descriptor. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure: overflow, non-convergence, truncation cap reached.
/// CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Quantity requested outside its domain of definition (e.g. CLT variances
/// outside the interior of the ballistic phase).
struct DomainError : NumericError {
  using NumericError::NumericError;
};

/// A weight or matrix entry exceeded double range. Root solvers catch this
/// and treat the spectral radius as +infinity when bracketing.
struct OverflowError : NumericError {
  using NumericError::NumericError;
};

}  // namespace polymer
