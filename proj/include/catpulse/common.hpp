#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace catpulse {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr cplx I{0.0, 1.0};

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};
struct LayoutError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct BoundaryError : Error {
  using Error::Error;
};
struct IntegrationError : Error {
  using Error::Error;
};
struct TruncationError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

// Global tolerances used by self-checks across modules.
struct NumericPolicy {
  double hermiticity_tol = 1e-10;
  double trace_tol = 1e-9;
  double psd_tol = 1e-8;
  double norm_tol = 1e-9;
  double tail_tol = 1e-6;
  double coherent_tail_tol = 1e-8;
};

NumericPolicy& numeric_policy();

}  // namespace catpulse
