#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace spike {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent caller input (bad dimensions, bad flags, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite, missing or otherwise unusable data values.
class InvalidDataError : public Error {
 public:
  using Error::Error;
};

/// File-level ingestion failures (parse errors, unknown labels, ...).
class IngestError : public Error {
 public:
  using Error::Error;
};

/// Numerical failures (solver did not converge, negative variance, ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A requested spike component has no usable noise-reduced eigenvalue.
class DegenerateSpikeError : public NumericError {
 public:
  using NumericError::NumericError;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ConfigError(what);
}

inline void require_finite(const Matrix& m, const std::string& name) {
  if (!m.allFinite())
    throw InvalidDataError(name + " contains non-finite entries");
}

/// Standard normal CDF, accurate to well below 1e-12 absolute.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

}  // namespace spike
