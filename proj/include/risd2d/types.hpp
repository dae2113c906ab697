#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace risd2d {

using Scalar = double;
using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

/// Raised when inputs disagree on dimensions or violate a type invariant.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when a channel required to be nonzero is identically zero.
class DegenerateChannelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised by the z-update bisection when no sign change can be bracketed.
class BracketError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised by the RGD primal update on NaN/Inf gradients.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point2 &a, const Point2 &b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Absolute tolerance on SINR residuals when declaring QoS feasibility.
inline constexpr double kQosTolerance = 1e-7;

/// Watts from a dBm figure.
inline double dbm_to_watts(double dbm) {
  return std::pow(10.0, (dbm - 30.0) / 10.0);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

} // namespace risd2d
