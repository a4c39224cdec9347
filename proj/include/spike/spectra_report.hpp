#pragma once

#include "spike/classifiers.hpp"
#include "spike/spectra.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spike {

/// Spectral diagnostics of one class: noise-reduced eigenvalues, the
/// cross-split spectrum, the spike-energy ratios the selection rule looks
/// at, and the selected spike count. All quantities are shift-invariant, so
/// no centering option is needed.
struct ClassSpectraReport {
  int label = 0;
  Eigen::Index n = 0, p = 0;
  double trace_s = 0.0;
  Vector nr_eigvals;      // leading min(10, n-2)
  Vector acute_eigvals;   // leading min(10, n2c-1) cross-split values
  Vector eps_hat;         // nr eigenvalue over trace
  Vector eta_hat;         // squared cross-split value over total spike energy
  Vector tau_hat;         // residual energy ratios
  Vector tau_tilde;       // tau_hat[r-1] * (1 + r * gamma(n))
  int k_hat = 0;
  std::string warning;
};

struct SpectraReport {
  ClassSpectraReport c1, c2;
};

namespace detail {

inline Vector head_or_all(const Vector& v, Eigen::Index count) {
  return v.head(std::min(count, v.size()));
}

inline ClassSpectraReport class_spectra_report(
    const Matrix& x, int label, const GammaFn& gamma,
    std::optional<std::uint64_t> shuffle_seed) {
  const ClassSample sample =
      shuffle_seed ? shuffled_columns(x, *shuffle_seed,
                                      static_cast<std::uint64_t>(label))
                   : ClassSample(x);
  const Eigen::Index n = sample.n();
  require(n >= 4, "spectral report needs at least 4 samples per class");

  const DualSpectrum spec = eigen_dual(dual_covariance(sample));
  const Vector nr = nr_eigenvalues(spec, n);
  CdmSpectrum cdm = cdm_spectrum(sample, nr, spec.trace_sd);

  ClassSpectraReport report;
  report.label = label;
  report.n = n;
  report.p = sample.p();
  report.trace_s = spec.trace_sd;
  report.k_hat = select_k(cdm, n, gamma, &report.warning);

  constexpr Eigen::Index kShown = 10;
  report.nr_eigvals = head_or_all(nr, kShown);
  report.acute_eigvals = head_or_all(cdm.acute_eigvals, kShown);
  report.eps_hat = head_or_all(cdm.eps_hat, kShown);
  report.eta_hat = head_or_all(cdm.eta_hat, kShown);
  report.tau_hat = head_or_all(cdm.tau_hat, kShown);
  report.tau_tilde = report.tau_hat;
  const double g = gamma(n);
  for (Eigen::Index r = 0; r < report.tau_tilde.size(); ++r)
    report.tau_tilde[r] *= 1.0 + static_cast<double>(r + 1) * g;
  return report;
}

}  // namespace detail

/// Diagnostics for both classes. With a shuffle seed the columns of each
/// class are permuted (stream = class label) before the cross split;
/// otherwise the given order is kept.
inline SpectraReport spectra_report(
    const Matrix& x1, const Matrix& x2, const GammaFn& gamma = default_gamma,
    std::optional<std::uint64_t> shuffle_seed = std::nullopt) {
  require(x1.rows() == x2.rows(), "feature dimensions differ between classes");
  SpectraReport report;
  report.c1 = detail::class_spectra_report(x1, 1, gamma, shuffle_seed);
  report.c2 = detail::class_spectra_report(x2, 2, gamma, shuffle_seed);
  return report;
}

}  // namespace spike
