#pragma once

#include "spike/classifiers.hpp"
#include "spike/thread_pool.hpp"

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace spike {

enum class KPolicy {
  per_fold,   // re-select the spike counts inside every fold
  fixed,      // user-supplied counts
  from_full,  // select once on the full data, then hold fixed
};

struct LoocvConfig {
  std::vector<Method> methods{Method::dbda, Method::tdbda};
  KPolicy k_policy = KPolicy::per_fold;
  std::pair<int, int> k_fixed{1, 1};
  bool center = true;
  GammaFn gamma = default_gamma;
  std::optional<std::uint64_t> cdm_shuffle_seed;
};

struct LoocvMethodResult {
  Method method = Method::dbda;
  long long errors1 = 0;
  long long errors2 = 0;
  double e1 = 0.0, e2 = 0.0, e = 0.0;
  std::vector<int> predictions1, predictions2;  // fold order
};

struct LoocvResult {
  std::vector<LoocvMethodResult> methods;
  long long n1 = 0, n2 = 0;
  std::optional<std::pair<int, int>> k_full;  // set under KPolicy::from_full
  std::vector<std::string> warnings;
};

namespace detail {

inline Matrix drop_column(const Matrix& x, Eigen::Index j) {
  Matrix out(x.rows(), x.cols() - 1);
  if (j > 0) out.leftCols(j) = x.leftCols(j);
  if (j + 1 < x.cols())
    out.rightCols(x.cols() - 1 - j) = x.rightCols(x.cols() - 1 - j);
  return out;
}

}  // namespace detail

/// Leave-one-out cross-validation. Every fold refits from scratch on the
/// remaining samples: the centering offset and, under per_fold, the spike
/// counts are re-estimated without the held-out observation.
inline LoocvResult loocv(const Matrix& x1, const Matrix& x2,
                         const LoocvConfig& config) {
  require(x1.rows() == x2.rows(), "feature dimensions differ between classes");
  require(x1.cols() >= 5 && x2.cols() >= 5,
          "leave-one-out needs at least 5 samples per class");
  require(!config.methods.empty(), "no methods requested");
  for (Method m : config.methods)
    require(m != Method::tdbda_oracle,
            "the oracle rule needs population structure, not data");

  LoocvResult result;
  result.n1 = x1.cols();
  result.n2 = x2.cols();

  FitOptions fit_opt;
  fit_opt.center = config.center;
  fit_opt.gamma = config.gamma;
  fit_opt.cdm_shuffle_seed = config.cdm_shuffle_seed;
  if (config.k_policy == KPolicy::fixed) {
    fit_opt.k = config.k_fixed;
  } else if (config.k_policy == KPolicy::from_full) {
    FitOptions full_opt = fit_opt;
    full_opt.k.reset();
    const TrainedModel full =
        fit(ClassSample(x1), ClassSample(x2), full_opt);
    result.k_full = {full.c1.k, full.c2.k};
    fit_opt.k = *result.k_full;
  }

  const long long folds = x1.cols() + x2.cols();
  const std::size_t m_count = config.methods.size();
  std::vector<std::uint8_t> wrong(static_cast<std::size_t>(folds) * m_count, 0);
  std::vector<std::int8_t> predicted(
      static_cast<std::size_t>(folds) * m_count, 0);
  std::vector<std::string> fold_warnings(static_cast<std::size_t>(folds));

  parallel_for(folds, [&](long long fold) {
    const bool first_class = fold < x1.cols();
    const Eigen::Index j =
        first_class ? static_cast<Eigen::Index>(fold)
                    : static_cast<Eigen::Index>(fold) - x1.cols();
    const Matrix t1 = first_class ? detail::drop_column(x1, j) : x1;
    const Matrix t2 = first_class ? x2 : detail::drop_column(x2, j);
    const Vector x0 = first_class ? x1.col(j) : x2.col(j);
    const int truth = first_class ? 1 : 2;

    const TrainedModel model = fit(ClassSample(t1), ClassSample(t2), fit_opt);
    std::string notes;
    for (const auto& w : model.warnings) {
      if (!notes.empty()) notes += "; ";
      notes += w;
    }
    fold_warnings[static_cast<std::size_t>(fold)] = notes;

    for (std::size_t m = 0; m < m_count; ++m) {
      const Method method = config.methods[m];
      const int label = score_with(model, method, x0).label;
      const std::size_t slot = static_cast<std::size_t>(fold) * m_count + m;
      predicted[slot] = static_cast<std::int8_t>(label);
      if (label != truth) wrong[slot] = 1;
    }
  });

  for (std::size_t m = 0; m < m_count; ++m) {
    LoocvMethodResult r;
    r.method = config.methods[m];
    for (long long fold = 0; fold < folds; ++fold) {
      const std::size_t slot = static_cast<std::size_t>(fold) * m_count + m;
      const bool first_class = fold < x1.cols();
      (first_class ? r.predictions1 : r.predictions2)
          .push_back(predicted[slot]);
      if (wrong[slot]) ++(first_class ? r.errors1 : r.errors2);
    }
    r.e1 = static_cast<double>(r.errors1) / static_cast<double>(x1.cols());
    r.e2 = static_cast<double>(r.errors2) / static_cast<double>(x2.cols());
    r.e = 0.5 * (r.e1 + r.e2);
    result.methods.push_back(std::move(r));
  }

  std::set<std::string> seen;
  for (const auto& w : fold_warnings)
    if (!w.empty() && seen.insert(w).second) result.warnings.push_back(w);
  return result;
}

}  // namespace spike
