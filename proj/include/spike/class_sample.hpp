#pragma once

#include "spike/common.hpp"

namespace spike {

/// One class of training data, stored feature-major: p rows, n columns,
/// one column per observation. Entries must be finite. Classifier fits and
/// cross-split spectra additionally require n >= 4; the cheaper spectral
/// kernels only need n >= 2 and check their own preconditions.
struct ClassSample {
  Matrix data;  // p x n

  ClassSample() = default;
  explicit ClassSample(Matrix m) : data(std::move(m)) {
    require(data.cols() >= 1, "class sample needs at least one observation");
    require(data.rows() >= 1, "class sample needs at least one feature");
    require_finite(data, "class sample");
  }

  Eigen::Index p() const { return data.rows(); }
  Eigen::Index n() const { return data.cols(); }

  Vector mean() const { return data.rowwise().mean(); }
};

}  // namespace spike
