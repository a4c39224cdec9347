#pragma once

#include "spike/class_sample.hpp"
#include "spike/common.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace spike {

/// Relative floor under which sample eigenvalues are treated as zero.
inline constexpr double kEigvalClampRel = 1e-12;

/// Eigenpairs of the n x n dual covariance. Eigenvalues are sorted
/// non-increasing and share the non-zero spectrum of the p x p sample
/// covariance; the structurally null direction along the all-ones vector is
/// dropped, leaving n - 1 pairs. Among tied eigenvalues the solver's order
/// is kept (the individual directions are then not unique, only their span).
struct DualSpectrum {
  Vector eigvals;   // length n - 1, non-increasing, >= 0
  Matrix eigvecs;   // n x (n - 1), orthonormal columns
  double trace_sd;  // tr of the dual covariance == tr of the sample covariance

  Eigen::Index n() const { return eigvecs.rows(); }
};

/// Noise-reduced eigenvalue estimates plus unit-scaled and noise-reduced
/// direction estimates for the leading r_max components.
struct NrSpectrum {
  Vector nr_eigvals;    // length n - 2
  Matrix nr_dirs;       // p x r_max; squared norm of column r is lam/lam_nr
  Matrix raw_dirs;      // p x r_max, unit-norm sample eigenvectors
  Vector u_signs;       // r_max entries in {-1, +1}: orientation applied to u
  double kappa_hat;     // subtracted noise magnitude at r = r_max
  Eigen::Index r_max;
};

/// Cross-data-matrix spectral summary of one class.
struct CdmSpectrum {
  Eigen::Index n1c, n2c;     // split sizes, n1c = ceil(n/2)
  Vector acute_eigvals;      // singular values, length n2c - 1
  Vector psi_hat;            // residual spike energy, psi_hat[r-1] = Psi_r
  Vector tau_hat;            // tau_hat[r-1] = Psi_{r+1} / Psi_r while Psi_r > 0
  Vector eps_hat;            // nr eigenvalue / trace, length n - 2 (empty if trace 0)
  Vector eta_hat;            // acute^2 / Psi_1, length n2c - 1 (empty if Psi_1 = 0)
  double trace_s;
  std::optional<int> k_hat;  // filled once a selection rule has run
};

using GammaFn = std::function<double(Eigen::Index)>;

/// Default selection penalty gamma(n) = sqrt(log(n) / n).
inline double default_gamma(Eigen::Index n) {
  return std::sqrt(std::log(static_cast<double>(n)) / static_cast<double>(n));
}

/// Gram matrix of the raw observations, the only O(n^2 p) pass.
inline Matrix gram(const ClassSample& sample) {
  return sample.data.transpose() * sample.data;
}

namespace detail {

/// Double-centers a Gram matrix and scales by 1/(n-1), in place logic kept
/// symmetric so round-off cannot break the eigensolver's symmetry check.
inline Matrix dual_from_gram(const Matrix& k) {
  const Eigen::Index n = k.rows();
  const Vector rowmean = k.rowwise().mean();
  const double grand = rowmean.mean();
  Matrix sd = k;
  sd.colwise() -= rowmean;
  sd.rowwise() -= rowmean.transpose();
  sd.array() += grand;
  sd /= static_cast<double>(n - 1);
  sd = ((sd + sd.transpose()) * 0.5).eval();
  return sd;
}

/// Flips v so that its entry of largest magnitude (first such index on ties)
/// is positive. Returns the sign applied.
inline double orient_largest_entry(Eigen::Ref<Vector> v) {
  Eigen::Index imax = 0;
  double best = std::abs(v[0]);
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best) {
      best = a;
      imax = i;
    }
  }
  if (v[imax] < 0.0) {
    v = -v;
    return -1.0;
  }
  return 1.0;
}

}  // namespace detail

/// n x n dual covariance (X - mean)' (X - mean) / (n - 1), computed from the
/// Gram matrix without forming any p x p object.
inline Matrix dual_covariance(const ClassSample& sample) {
  require(sample.n() >= 2, "dual covariance needs n >= 2");
  return detail::dual_from_gram(gram(sample));
}

/// Eigendecomposition of a dual covariance. Eigenvalues below
/// kEigvalClampRel times the largest are clamped to zero.
inline DualSpectrum eigen_dual(const Matrix& sd) {
  require(sd.rows() == sd.cols() && sd.rows() >= 2,
          "dual covariance must be square with n >= 2");
  require_finite(sd, "dual covariance");
  const double scale = sd.cwiseAbs().maxCoeff();
  if ((sd - sd.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(1.0, scale))
    throw InvalidDataError("dual covariance is not symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(sd);
  if (solver.info() != Eigen::Success)
    throw NumericError(
        "dual eigensolver failed: n=" + std::to_string(sd.rows()) +
        " trace=" + std::to_string(sd.trace()) +
        " max|entry|=" + std::to_string(scale));

  const Eigen::Index n = sd.rows();
  DualSpectrum spec;
  spec.trace_sd = sd.trace();
  spec.eigvals.resize(n - 1);
  spec.eigvecs.resize(n, n - 1);
  const double clamp = kEigvalClampRel * std::max(0.0, solver.eigenvalues()(n - 1));
  for (Eigen::Index r = 0; r < n - 1; ++r) {
    const double lam = solver.eigenvalues()(n - 1 - r);  // descending
    spec.eigvals[r] = lam > clamp ? lam : 0.0;
    spec.eigvecs.col(r) = solver.eigenvectors().col(n - 1 - r);
    detail::orient_largest_entry(spec.eigvecs.col(r));
  }
  return spec;
}

/// Noise-reduced eigenvalues: the r-th sample eigenvalue minus the average
/// of the remaining spectrum mass, for r = 1..n-2. Always within
/// [0, sample eigenvalue].
inline Vector nr_eigenvalues(const DualSpectrum& spec, Eigen::Index n) {
  require(n == spec.n(), "sample size does not match the spectrum");
  require(n >= 3, "noise reduction needs n >= 3");
  Vector out(n - 2);
  double prefix = 0.0;
  for (Eigen::Index r = 0; r < n - 2; ++r) {
    prefix += spec.eigvals[r];
    const double tail = spec.trace_sd - prefix;
    double lam = spec.eigvals[r] - tail / static_cast<double>(n - 2 - r);
    lam = std::clamp(lam, 0.0, spec.eigvals[r]);
    out[r] = lam;
  }
  return out;
}

/// Direction estimates for the leading r_max components. Signs are fixed by
/// requiring the largest-magnitude entry of each noise-reduced direction to
/// be positive; the same flip is applied to the raw direction and recorded
/// in u_signs so downstream scores stay consistent with the dual vectors.
inline NrSpectrum nr_directions(const ClassSample& sample,
                                const DualSpectrum& spec,
                                const Vector& nr_eigvals, Eigen::Index r_max) {
  const Eigen::Index n = sample.n();
  require(n == spec.n(), "sample does not match the spectrum");
  require(nr_eigvals.size() == n - 2, "noise-reduced eigenvalues have wrong length");
  require(r_max >= 0 && r_max <= n - 2, "component count must lie in [0, n-2]");

  const double tol = kEigvalClampRel * std::max(spec.eigvals[0], 0.0);
  for (Eigen::Index r = 0; r < r_max; ++r)
    if (!(nr_eigvals[r] > tol))
      throw DegenerateSpikeError("noise-reduced eigenvalue " +
                                 std::to_string(r + 1) +
                                 " is degenerate; reduce the spike count");

  NrSpectrum nr;
  nr.nr_eigvals = nr_eigvals;
  nr.r_max = r_max;
  nr.kappa_hat =
      (spec.trace_sd - spec.eigvals.head(r_max).sum()) /
      static_cast<double>(n - 1 - r_max);
  nr.u_signs = Vector::Ones(r_max);
  const Matrix u = spec.eigvecs.leftCols(r_max);
  Matrix dirs = sample.data * u;  // p x r_max
  dirs.noalias() -= sample.mean() * u.colwise().sum();
  nr.nr_dirs.resize(sample.p(), r_max);
  nr.raw_dirs.resize(sample.p(), r_max);
  for (Eigen::Index r = 0; r < r_max; ++r) {
    nr.nr_dirs.col(r) =
        dirs.col(r) / std::sqrt(static_cast<double>(n - 1) * nr_eigvals[r]);
    const double sign = detail::orient_largest_entry(nr.nr_dirs.col(r));
    nr.u_signs[r] = sign;
    nr.raw_dirs.col(r) =
        sign * dirs.col(r) /
        std::sqrt(static_cast<double>(n - 1) * spec.eigvals[r]);
  }
  return nr;
}

/// Cross-data-matrix spectrum. The class is split into its first ceil(n/2)
/// columns and the rest, in the given column order; shuffle beforehand if a
/// randomised split is wanted. Needs the full-sample noise-reduced
/// eigenvalues and trace for the eps ratios.
inline CdmSpectrum cdm_spectrum(const ClassSample& sample,
                                const Vector& nr_eigvals, double trace_s) {
  const Eigen::Index n = sample.n();
  require(n >= 4, "cross-split spectrum needs n >= 4");
  CdmSpectrum cdm;
  cdm.n1c = (n + 1) / 2;
  cdm.n2c = n - cdm.n1c;
  cdm.trace_s = trace_s;

  const auto x1 = sample.data.leftCols(cdm.n1c);
  const auto x2 = sample.data.rightCols(cdm.n2c);
  const Vector m1 = x1.rowwise().mean();
  const Vector m2 = x2.rowwise().mean();
  // (X1 - m1)'(X2 - m2) without p x p or p x n temporaries.
  Matrix cross = x1.transpose() * x2;
  cross.noalias() -= (x1.transpose() * m2) * Eigen::RowVectorXd::Ones(cdm.n2c);
  cross.noalias() -= Vector::Ones(cdm.n1c) * (m1.transpose() * x2);
  cross.array() += m1.dot(m2);
  cross /= std::sqrt(static_cast<double>((cdm.n1c - 1) * (cdm.n2c - 1)));

  Eigen::JacobiSVD<Matrix> svd(cross);
  const Vector& sv = svd.singularValues();
  cdm.acute_eigvals = sv.head(cdm.n2c - 1);

  const double psi1 = cross.squaredNorm();
  cdm.psi_hat.resize(cdm.n2c);
  double psi = psi1;
  for (Eigen::Index r = 0; r < cdm.n2c; ++r) {
    cdm.psi_hat[r] = std::max(psi, 0.0);
    if (r < cdm.n2c - 1) psi -= sv[r] * sv[r];
  }
  std::vector<double> taus;
  for (Eigen::Index r = 0; r + 1 < cdm.n2c; ++r) {
    if (!(cdm.psi_hat[r] > 0.0)) break;
    taus.push_back(cdm.psi_hat[r + 1] / cdm.psi_hat[r]);
  }
  if (!taus.empty())
    cdm.tau_hat = Eigen::Map<const Vector>(
        taus.data(), static_cast<Eigen::Index>(taus.size()));

  if (trace_s > 0.0) {
    cdm.eps_hat = nr_eigvals / trace_s;
  }
  if (psi1 > 0.0) {
    cdm.eta_hat = (cdm.acute_eigvals.array().square() / psi1).matrix();
  }
  return cdm;
}

/// Convenience overload computing the noise-reduced eigenvalues internally.
inline CdmSpectrum cdm_spectrum(const ClassSample& sample) {
  const DualSpectrum spec = eigen_dual(dual_covariance(sample));
  return cdm_spectrum(sample, nr_eigenvalues(spec, sample.n()), spec.trace_sd);
}

/// Spike-count selection: the smallest r >= 0 whose next energy ratio,
/// inflated by 1 + (r+1) gamma(n), exceeds one; capped at n2c - 2. A cap or
/// an undefined ratio sequence is reported through *warning when given.
inline int select_k(const CdmSpectrum& cdm, Eigen::Index n,
                    const GammaFn& gamma = default_gamma,
                    std::string* warning = nullptr) {
  require(n >= 4, "spike-count selection needs n >= 4");
  const int cap = static_cast<int>(cdm.n2c) - 2;
  if (cdm.tau_hat.size() == 0) {
    if (warning)
      *warning = "spike energy is zero; selected k = 0";
    return 0;
  }
  const double g = gamma(n);
  for (int r = 0; r < cdm.tau_hat.size(); ++r) {
    if (cdm.tau_hat[r] * (1.0 + (r + 1) * g) > 1.0) {
      if (r > cap) {
        if (warning)
          *warning = "selection rule fired beyond the split rank; capped k at " +
                     std::to_string(cap);
        return cap;
      }
      return r;
    }
  }
  if (warning)
    *warning = "selection rule never fired; capped k at " + std::to_string(cap);
  return cap;
}

}  // namespace spike
