#pragma once

#include "spike/class_sample.hpp"
#include "spike/common.hpp"
#include "spike/pc_scores.hpp"
#include "spike/rng.hpp"
#include "spike/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spike {

enum class Method { dbda, tdbda, tdbda_naive, tdbda_oracle, dlda, dqda };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::dbda: return "dbda";
    case Method::tdbda: return "tdbda";
    case Method::tdbda_naive: return "tdbda_naive";
    case Method::tdbda_oracle: return "tdbda_oracle";
    case Method::dlda: return "dlda";
    case Method::dqda: return "dqda";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "dbda") return Method::dbda;
  if (s == "tdbda") return Method::tdbda;
  if (s == "tdbda_naive") return Method::tdbda_naive;
  if (s == "tdbda_oracle") return Method::tdbda_oracle;
  if (s == "dlda") return Method::dlda;
  if (s == "dqda") return Method::dqda;
  throw ConfigError("unknown method '" + s + "'");
}

/// Classification outcome. Negative score means class 1; a zero score ties
/// to class 2, so label = 1 exactly when score < 0.
struct Decision {
  int label;
  double score;
  Method method;
};

inline Decision decide(double score, Method method) {
  return Decision{score < 0.0 ? 1 : 2, score, method};
}

struct FitOptions {
  std::optional<std::pair<int, int>> k;  // fixed spike counts; nullopt = auto
  bool center = false;                   // subtract the pooled mean first
  GammaFn gamma = default_gamma;
  std::optional<std::uint64_t> cdm_shuffle_seed;  // shuffle columns for the split
};

/// Everything fitted from one class (in centered coordinates when centering
/// is on).
struct ClassModel {
  Eigen::Index n = 0;
  Vector mean;
  double trace_s = 0.0;
  DualSpectrum dual;
  Vector nr_eigvals;
  CdmSpectrum cdm;
  NrSpectrum nr;     // directions for the leading k components
  PcScores scores;   // bias-corrected training scores, k rows
  int k = 0;
  Vector var;        // per-feature variance, floored
};

struct TrainedModel {
  ClassModel c1, c2;
  bool centered = false;
  Vector offset;      // pooled mean subtracted from every observation

  // Precomputed classifier pieces (all in centered coordinates).
  Vector mean_diff;   // mean2 - mean1
  double mid_dot = 0.0;      // ((mean1 + mean2)/2) . mean_diff
  double trace_term = 0.0;   // -tr(S1)/(2 n1) + tr(S2)/(2 n2)
  Vector b1, b2;             // per-component corrections, k_i entries
  double pair1 = 0.0, pair2 = 0.0;  // symmetrised score products / (n (n-1))
  Vector naive_m1, naive_m2;        // projected class means
  double naive_trace_term = 0.0;    // trace term with spike mass removed
  Vector pooled_var;                // floored pooled per-feature variance
  double logdet1 = 0.0, logdet2 = 0.0;  // sum of log variances per class

  std::vector<std::string> warnings;
};

namespace detail {

inline Vector feature_variance(const Matrix& x) {
  const Eigen::Index n = x.cols();
  const Vector m = x.rowwise().mean();
  Vector var = Vector::Zero(x.rows());
  for (Eigen::Index j = 0; j < n; ++j)
    var.array() += (x.col(j) - m).array().square();
  return var / static_cast<double>(n - 1);
}

/// Floors tiny variances at 1e-12 times the largest one (absolute 1e-12 if
/// the class is entirely constant). Returns the number floored.
inline Eigen::Index floor_variance(Vector& var) {
  const double mx = var.maxCoeff();
  const double floor = mx > 0.0 ? 1e-12 * mx : 1e-12;
  Eigen::Index count = 0;
  for (Eigen::Index g = 0; g < var.size(); ++g)
    if (var[g] < floor) {
      var[g] = floor;
      ++count;
    }
  return count;
}

inline ClassSample shuffled_columns(const Matrix& x, std::uint64_t seed,
                                    std::uint64_t stream) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.cols()));
  std::iota(idx.begin(), idx.end(), 0);
  Philox rng(seed, stream);
  for (std::size_t i = idx.size() - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.below(static_cast<std::uint32_t>(i + 1))]);
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) out.col(j) = x.col(idx[j]);
  return ClassSample(std::move(out));
}

inline ClassModel fit_class(const Matrix& x, int class_id,
                            const FitOptions& opt,
                            std::vector<std::string>& warnings) {
  ClassModel cm;
  cm.n = x.cols();
  const ClassSample sample{Matrix(x)};
  const Matrix k_gram = gram(sample);
  cm.mean = sample.mean();
  cm.dual = eigen_dual(detail::dual_from_gram(k_gram));
  cm.trace_s = cm.dual.trace_sd;
  cm.nr_eigvals = nr_eigenvalues(cm.dual, cm.n);

  if (opt.cdm_shuffle_seed) {
    const ClassSample shuffled = shuffled_columns(
        x, *opt.cdm_shuffle_seed, static_cast<std::uint64_t>(class_id));
    cm.cdm = cdm_spectrum(shuffled, cm.nr_eigvals, cm.trace_s);
  } else {
    cm.cdm = cdm_spectrum(sample, cm.nr_eigvals, cm.trace_s);
  }

  int k;
  if (opt.k) {
    k = class_id == 1 ? opt.k->first : opt.k->second;
    require(k >= 0 && k <= static_cast<int>(cm.n) - 2,
            "fixed spike count must lie in [0, n-2]");
  } else {
    std::string warning;
    k = select_k(cm.cdm, cm.n, opt.gamma, &warning);
    if (!warning.empty())
      warnings.push_back("class " + std::to_string(class_id) + ": " + warning);
  }
  cm.cdm.k_hat = k;

  const double tol = kEigvalClampRel * std::max(cm.dual.eigvals[0], 0.0);
  while (k > 0 && !(cm.nr_eigvals[k - 1] > tol)) {
    warnings.push_back("class " + std::to_string(class_id) +
                       ": noise-reduced eigenvalue " + std::to_string(k) +
                       " is degenerate; reduced k to " + std::to_string(k - 1));
    --k;
  }
  cm.k = k;

  cm.nr = nr_directions(sample, cm.dual, cm.nr_eigvals, k);
  cm.scores = score_training(k_gram, cm.dual, cm.nr, k);
  cm.var = feature_variance(x);
  return cm;
}

}  // namespace detail

/// Fits every distance-based and diagonal classifier state in one pass:
/// spectra, spike counts (fixed or selected), transformed scores and the
/// diagonal variances. Runs in O(n^2 p) time; no p x p object is formed.
inline TrainedModel fit(const ClassSample& train1, const ClassSample& train2,
                        const FitOptions& opt = {}) {
  require(train1.p() == train2.p(), "training classes disagree on dimension");
  require(train1.n() >= 4 && train2.n() >= 4,
          "each training class needs at least 4 observations");

  TrainedModel m;
  m.centered = opt.center;
  const Eigen::Index p = train1.p();
  if (opt.center) {
    m.offset = (train1.data.rowwise().sum() + train2.data.rowwise().sum()) /
               static_cast<double>(train1.n() + train2.n());
  } else {
    m.offset = Vector::Zero(p);
  }
  Matrix x1 = train1.data;
  Matrix x2 = train2.data;
  if (opt.center) {
    x1.colwise() -= m.offset;
    x2.colwise() -= m.offset;
  }

  m.c1 = detail::fit_class(x1, 1, opt, m.warnings);
  m.c2 = detail::fit_class(x2, 2, opt, m.warnings);

  m.mean_diff = m.c2.mean - m.c1.mean;
  m.mid_dot = 0.5 * (m.c1.mean + m.c2.mean).dot(m.mean_diff);
  m.trace_term = -m.c1.trace_s / (2.0 * static_cast<double>(m.c1.n)) +
                 m.c2.trace_s / (2.0 * static_cast<double>(m.c2.n));

  // Transformed-classifier corrections.
  const Vector g1 = m.c1.mean - m.c1.nr.nr_dirs * m.c1.scores.train_means;
  const Vector g2 = m.c2.mean - m.c2.nr.nr_dirs * m.c2.scores.train_means;
  m.b1 = m.c1.scores.train_means - 0.5 * (m.c1.nr.nr_dirs.transpose() * g2);
  m.b2 = m.c2.scores.train_means - 0.5 * (m.c2.nr.nr_dirs.transpose() * g1);
  auto pair_sum = [](const ClassModel& cm) {
    double total = 0.0;
    for (Eigen::Index r = 0; r < cm.k; ++r) {
      const double s = cm.scores.train_scores.row(r).sum();
      const double q = cm.scores.train_scores.row(r).squaredNorm();
      total += 0.5 * (s * s - q);
    }
    return total / (static_cast<double>(cm.n) * static_cast<double>(cm.n - 1));
  };
  m.pair1 = pair_sum(m.c1);
  m.pair2 = pair_sum(m.c2);

  // Naive projected pieces: raw directions are exact unit eigenvectors, so
  // the projected trace is the trace minus the leading sample eigenvalues.
  m.naive_m1 = m.c1.mean - m.c1.nr.raw_dirs *
                               (m.c1.nr.raw_dirs.transpose() * m.c1.mean);
  m.naive_m2 = m.c2.mean - m.c2.nr.raw_dirs *
                               (m.c2.nr.raw_dirs.transpose() * m.c2.mean);
  const double ntr1 = m.c1.trace_s - m.c1.dual.eigvals.head(m.c1.k).sum();
  const double ntr2 = m.c2.trace_s - m.c2.dual.eigvals.head(m.c2.k).sum();
  m.naive_trace_term = -ntr1 / (2.0 * static_cast<double>(m.c1.n)) +
                       ntr2 / (2.0 * static_cast<double>(m.c2.n));

  // Diagonal baselines.
  m.pooled_var = (static_cast<double>(m.c1.n - 1) * m.c1.var +
                  static_cast<double>(m.c2.n - 1) * m.c2.var) /
                 static_cast<double>(m.c1.n + m.c2.n - 2);
  auto floor_into = [&m](Vector& v, const char* name) {
    const Eigen::Index floored = detail::floor_variance(v);
    if (floored > 0)
      m.warnings.push_back(std::string(name) + ": floored " +
                           std::to_string(floored) + " tiny variances");
  };
  floor_into(m.c1.var, "class 1 variance");
  floor_into(m.c2.var, "class 2 variance");
  floor_into(m.pooled_var, "pooled variance");
  m.logdet1 = m.c1.var.array().log().sum();
  m.logdet2 = m.c2.var.array().log().sum();
  return m;
}

namespace detail {

inline Vector centered_point(const TrainedModel& m, const Vector& x0) {
  require(x0.size() == m.mean_diff.size(),
          "observation dimension does not match the model");
  require_finite(x0, "observation");
  if (!m.centered) return x0;
  return x0 - m.offset;
}

inline double dbda_raw(const TrainedModel& m, const Vector& x) {
  return x.dot(m.mean_diff) - m.mid_dot + m.trace_term;
}

}  // namespace detail

/// Distance-based discriminant score; negative assigns class 1.
inline Decision dbda_score(const TrainedModel& m, const Vector& x0) {
  const Vector x = detail::centered_point(m, x0);
  return decide(detail::dbda_raw(m, x), Method::dbda);
}

/// Distance-based score after the data transformation that removes the
/// estimated strongly spiked components of both classes.
inline Decision tdbda_score(const TrainedModel& m, const Vector& x0) {
  const Vector x = detail::centered_point(m, x0);
  double w = detail::dbda_raw(m, x);
  if (m.c1.k > 0) w += (m.c1.nr.nr_dirs.transpose() * x).dot(m.b1);
  if (m.c2.k > 0) w -= (m.c2.nr.nr_dirs.transpose() * x).dot(m.b2);
  w += -m.pair1 + m.pair2;
  return decide(w, Method::tdbda);
}

/// Transformed score using raw (not bias-corrected) eigenvector projectors.
inline Decision tdbda_naive_score(const TrainedModel& m, const Vector& x0) {
  const Vector x = detail::centered_point(m, x0);
  auto project_out = [](const Matrix& dirs, const Vector& v) -> Vector {
    if (dirs.cols() == 0) return v;
    return v - dirs * (dirs.transpose() * v);
  };
  const Vector a1 = project_out(m.c1.nr.raw_dirs, m.c1.mean - x);
  const Vector a2 = project_out(m.c2.nr.raw_dirs, m.c2.mean - x);
  const double w = -0.5 * (a1 + a2).dot(m.naive_m2 - m.naive_m1) +
                   m.naive_trace_term;
  return decide(w, Method::tdbda_naive);
}

/// Diagonal linear discriminant (pooled per-feature variances).
inline Decision dlda_score(const TrainedModel& m, const Vector& x0) {
  const Vector x = detail::centered_point(m, x0);
  const double d1 =
      ((x - m.c1.mean).array().square() / m.pooled_var.array()).sum();
  const double d2 =
      ((x - m.c2.mean).array().square() / m.pooled_var.array()).sum();
  return decide(d1 - d2, Method::dlda);
}

/// Diagonal quadratic discriminant (per-class per-feature variances).
inline Decision dqda_score(const TrainedModel& m, const Vector& x0) {
  const Vector x = detail::centered_point(m, x0);
  const double d1 =
      ((x - m.c1.mean).array().square() / m.c1.var.array()).sum() + m.logdet1;
  const double d2 =
      ((x - m.c2.mean).array().square() / m.c2.var.array()).sum() + m.logdet2;
  return decide(d1 - d2, Method::dqda);
}

inline Decision score_with(const TrainedModel& m, Method method,
                           const Vector& x0) {
  switch (method) {
    case Method::dbda: return dbda_score(m, x0);
    case Method::tdbda: return tdbda_score(m, x0);
    case Method::tdbda_naive: return tdbda_naive_score(m, x0);
    case Method::dlda: return dlda_score(m, x0);
    case Method::dqda: return dqda_score(m, x0);
    case Method::tdbda_oracle:
      throw ConfigError("oracle scoring needs population directions");
  }
  throw ConfigError("unknown method");
}

/// Transformed classifier with known population spike directions; the
/// reference point simulations compare against. Columns of h1/h2 must be
/// orthonormal within each class.
struct OracleProjectorModel {
  Matrix h1, h2;        // p x k_i
  Vector a1bar, a2bar;  // projected class means
  Vector diff;          // a2bar - a1bar
  double pair_term = 0.0;
};

inline OracleProjectorModel fit_oracle(const Matrix& h1, const Matrix& h2,
                                       const ClassSample& train1,
                                       const ClassSample& train2) {
  require(train1.p() == train2.p(), "training classes disagree on dimension");
  const Eigen::Index p = train1.p();
  require((h1.rows() == p || h1.cols() == 0) &&
              (h2.rows() == p || h2.cols() == 0),
          "projector directions disagree with the data dimension");
  for (const Matrix* h : {&h1, &h2}) {
    if (h->cols() == 0) continue;
    const Matrix g = h->transpose() * (*h);
    if ((g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() >
        1e-8)
      throw ConfigError("projector directions are not orthonormal");
  }

  OracleProjectorModel om;
  om.h1 = h1;
  om.h2 = h2;
  auto projected_mean = [](const Matrix& h, const Vector& mean) -> Vector {
    if (h.cols() == 0) return mean;
    return mean - h * (h.transpose() * mean);
  };
  const Vector mean1 = train1.mean();
  const Vector mean2 = train2.mean();
  om.a1bar = projected_mean(h1, mean1);
  om.a2bar = projected_mean(h2, mean2);
  om.diff = om.a2bar - om.a1bar;

  auto pair_sum = [](const Matrix& h, const Matrix& x, const Vector& abar) {
    const Eigen::Index n = x.cols();
    double sq = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      double nj = x.col(j).squaredNorm();
      if (h.cols() > 0) nj -= (h.transpose() * x.col(j)).squaredNorm();
      sq += nj;
    }
    const double total = static_cast<double>(n) * abar.norm();
    return 0.5 * (total * total - sq) /
           (static_cast<double>(n) * static_cast<double>(n - 1));
  };
  om.pair_term = pair_sum(h1, train1.data, om.a1bar) -
                 pair_sum(h2, train2.data, om.a2bar);
  return om;
}

inline Decision tdbda_oracle_score(const OracleProjectorModel& om,
                                   const Vector& x0) {
  require(x0.size() == om.diff.size(),
          "observation dimension does not match the model");
  require_finite(x0, "observation");
  Vector xa = x0;
  if (om.h1.cols() > 0) xa -= 0.5 * (om.h1 * (om.h1.transpose() * x0));
  if (om.h2.cols() > 0) xa -= 0.5 * (om.h2 * (om.h2.transpose() * x0));
  return decide(xa.dot(om.diff) + om.pair_term, Method::tdbda_oracle);
}

}  // namespace spike
