#pragma once

#include "spike/class_sample.hpp"
#include "spike/common.hpp"
#include "spike/spectra.hpp"

#include <cmath>
#include <string>

namespace spike {

/// Bias-corrected principal component scores of the training observations.
struct PcScores {
  Matrix train_scores;  // k x n, entry (r, j) is the score of column j
  Vector train_means;   // length k, row means of train_scores
};

/// Scores of a new observation against the noise-reduced directions.
inline Vector score_new(const Vector& x0, const NrSpectrum& nr) {
  require(x0.size() == nr.nr_dirs.rows(),
          "new observation dimension does not match the directions");
  require_finite(x0, "new observation");
  return nr.nr_dirs.transpose() * x0;
}

/// Leave-one-out modified dual vectors for component r: column j equals the
/// r-th dual eigenvector with its j-th entry replaced by -u_j / (n - 1).
/// Orientation follows spec.eigvecs; apply NrSpectrum::u_signs when mixing
/// with noise-reduced directions.
inline Matrix modified_dual_vectors(const DualSpectrum& spec, Eigen::Index r) {
  require(r >= 0 && r < spec.eigvals.size(), "component index out of range");
  const Eigen::Index n = spec.n();
  const Vector& u = spec.eigvecs.col(r);
  Matrix out = u.replicate(1, n);
  for (Eigen::Index j = 0; j < n; ++j)
    out(j, j) = -u[j] / static_cast<double>(n - 1);
  return out;
}

/// Training scores for the leading k components, computed at Gram level:
/// the inner product of each observation with its own leave-one-out
/// direction never requires more than the n x n Gram matrix.
inline PcScores score_training(const Matrix& gram_matrix,
                               const DualSpectrum& spec, const NrSpectrum& nr,
                               Eigen::Index k) {
  const Eigen::Index n = spec.n();
  require(gram_matrix.rows() == n && gram_matrix.cols() == n,
          "Gram matrix does not match the spectrum");
  require(k >= 0 && k <= nr.r_max, "requested more components than computed");
  require(n >= 3, "training scores need n >= 3");

  const Vector rowsum = gram_matrix.rowwise().sum();
  PcScores scores;
  scores.train_scores.resize(k, n);
  scores.train_means.resize(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    const double lam_nr = nr.nr_eigvals[r];
    if (!(lam_nr > 0.0))
      throw DegenerateSpikeError("noise-reduced eigenvalue " +
                                 std::to_string(r + 1) + " is degenerate");
    const double c =
        std::sqrt(static_cast<double>(n - 1)) /
        (static_cast<double>(n - 2) * std::sqrt(lam_nr));
    const Vector u = nr.u_signs[r] * spec.eigvecs.col(r);
    const Vector v = gram_matrix * u;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double t_jj = gram_matrix(j, j) - rowsum[j] / static_cast<double>(n);
      scores.train_scores(r, j) =
          c * (v[j] - static_cast<double>(n) / static_cast<double>(n - 1) *
                          u[j] * t_jj);
    }
    scores.train_means[r] = scores.train_scores.row(r).mean();
  }
  return scores;
}

/// Convenience overload computing the Gram matrix from the sample.
inline PcScores score_training(const ClassSample& sample,
                               const DualSpectrum& spec, const NrSpectrum& nr,
                               Eigen::Index k) {
  require(sample.n() == spec.n(), "sample does not match the spectrum");
  return score_training(gram(sample), spec, nr, k);
}

}  // namespace spike
