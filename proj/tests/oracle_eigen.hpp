#pragma once

// Cyclic Jacobi eigensolver used as an independent reference. The library
// goes through tridiagonalisation; this one annihilates off-diagonal entries
// with plane rotations, so agreement is meaningful evidence.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace testref {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigenpairs of a symmetric matrix, eigenvalues descending.
inline void jacobi_eigen(Matrix a, Vector& vals, Matrix& vecs) {
  const Eigen::Index n = a.rows();
  vecs = Matrix::Identity(n, n);
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30 * scale * scale) break;
    if (sweep == 199) throw std::runtime_error("jacobi did not converge");
    for (Eigen::Index pp = 0; pp < n; ++pp) {
      for (Eigen::Index q = pp + 1; q < n; ++q) {
        if (std::abs(a(pp, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(pp, pp)) / (2.0 * a(pp, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double aip = a(i, pp), aiq = a(i, q);
          a(i, pp) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double api = a(pp, i), aqi = a(q, i);
          a(pp, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double vip = vecs(i, pp), viq = vecs(i, q);
          vecs(i, pp) = c * vip - s * viq;
          vecs(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  vals = a.diagonal();
  for (Eigen::Index i = 0; i < n; ++i) {  // selection sort, descending
    Eigen::Index best = i;
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (vals[j] > vals[best]) best = j;
    if (best != i) {
      std::swap(vals[i], vals[best]);
      vecs.col(i).swap(vecs.col(best));
    }
  }
}

}  // namespace testref
