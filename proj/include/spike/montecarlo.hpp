#pragma once

#include "spike/classifiers.hpp"
#include "spike/simgen.hpp"
#include "spike/thread_pool.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spike {

struct MonteCarloConfig {
  long long reps = 100;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::dbda, Method::tdbda};
  std::optional<std::pair<int, int>> k;  // fixed spike counts; nullopt = data-driven
  bool center = false;
  bool fixed_training = false;  // draw one training set, vary only test points
  GammaFn gamma = default_gamma;
  std::optional<std::uint64_t> cdm_shuffle_seed;
};

struct MethodErrorRates {
  Method method = Method::dbda;
  long long errors1 = 0;
  long long errors2 = 0;
  long long skipped = 0;  // replications where this method was unavailable
  long long evaluated = 0;
  double e1 = 0.0, e2 = 0.0, e = 0.0;
  double se1 = 0.0, se2 = 0.0, se = 0.0;
};

struct MonteCarloResult {
  std::vector<MethodErrorRates> rates;
  long long reps = 0;
  std::vector<std::string> notes;  // deduplicated skip reasons with counts
};

namespace detail {

inline bool needs_estimated_fit(Method m) { return m != Method::tdbda_oracle; }

}  // namespace detail

/// Estimates misclassification rates on a synthetic scenario. Replication r
/// uses its own generator stream, so results do not depend on the thread
/// schedule; stream 0 is reserved for the shared training set when
/// fixed_training is set. Each replication draws fresh training samples
/// (unless fixed), fits once, and classifies one new observation from each
/// class with every requested method.
inline MonteCarloResult monte_carlo(const Scenario& scenario,
                                    const MonteCarloConfig& config) {
  require(config.reps >= 1, "reps must be at least 1");
  require(!config.methods.empty(), "no methods requested");
  const auto& spec = scenario.spec;
  const std::size_t m_count = config.methods.size();

  bool any_estimated = false;
  bool any_oracle = false;
  for (Method m : config.methods)
    (detail::needs_estimated_fit(m) ? any_estimated : any_oracle) = true;

  FitOptions fit_opt;
  fit_opt.k = config.k;
  fit_opt.center = config.center;
  fit_opt.gamma = config.gamma;
  fit_opt.cdm_shuffle_seed = config.cdm_shuffle_seed;

  const auto fit_models = [&](const Matrix& x1, const Matrix& x2,
                              std::optional<TrainedModel>& model,
                              std::optional<OracleProjectorModel>& oracle,
                              std::string& failure) {
    const ClassSample s1(x1), s2(x2);
    if (any_oracle)
      oracle = fit_oracle(scenario.truth.h1, scenario.truth.h2, s1, s2);
    if (any_estimated) {
      try {
        model = fit(s1, s2, fit_opt);
      } catch (const Error& err) {
        failure = err.what();
      }
    }
  };

  std::optional<TrainedModel> shared_model;
  std::optional<OracleProjectorModel> shared_oracle;
  std::string shared_failure;
  if (config.fixed_training) {
    Philox rng(config.seed, 0);
    const Matrix x1 = draw_sample(spec.gen1, rng, spec.n1);
    const Matrix x2 = draw_sample(spec.gen2, rng, spec.n2);
    fit_models(x1, x2, shared_model, shared_oracle, shared_failure);
  }

  // Per-replication slots: bit 0 class-1 error, bit 1 class-2 error,
  // bit 2 skipped.
  std::vector<std::uint8_t> flags(
      static_cast<std::size_t>(config.reps) * m_count, 0);
  std::vector<std::string> rep_notes(static_cast<std::size_t>(config.reps));

  parallel_for(config.reps, [&](long long rep) {
    Philox rng(config.seed, static_cast<std::uint64_t>(rep) + 1);
    std::optional<TrainedModel> model;
    std::optional<OracleProjectorModel> oracle;
    std::string failure;
    if (config.fixed_training) {
      model = shared_model;
      oracle = shared_oracle;
      failure = shared_failure;
    } else {
      const Matrix x1 = draw_sample(spec.gen1, rng, spec.n1);
      const Matrix x2 = draw_sample(spec.gen2, rng, spec.n2);
      fit_models(x1, x2, model, oracle, failure);
    }
    const Vector x01 = draw_observation(spec.gen1, rng);
    const Vector x02 = draw_observation(spec.gen2, rng);

    for (std::size_t m = 0; m < m_count; ++m) {
      const Method method = config.methods[m];
      std::uint8_t& slot =
          flags[static_cast<std::size_t>(rep) * m_count + m];
      if (method == Method::tdbda_oracle) {
        if (tdbda_oracle_score(*oracle, x01).label != 1) slot |= 1;
        if (tdbda_oracle_score(*oracle, x02).label != 2) slot |= 2;
        continue;
      }
      if (!model) {
        slot |= 4;
        if (rep_notes[static_cast<std::size_t>(rep)].empty())
          rep_notes[static_cast<std::size_t>(rep)] = failure;
        continue;
      }
      if (score_with(*model, method, x01).label != 1) slot |= 1;
      if (score_with(*model, method, x02).label != 2) slot |= 2;
    }
  });

  MonteCarloResult result;
  result.reps = config.reps;
  for (std::size_t m = 0; m < m_count; ++m) {
    MethodErrorRates r;
    r.method = config.methods[m];
    for (long long rep = 0; rep < config.reps; ++rep) {
      const std::uint8_t slot =
          flags[static_cast<std::size_t>(rep) * m_count + m];
      if (slot & 4) {
        ++r.skipped;
        continue;
      }
      ++r.evaluated;
      if (slot & 1) ++r.errors1;
      if (slot & 2) ++r.errors2;
    }
    if (r.evaluated > 0) {
      const double n = static_cast<double>(r.evaluated);
      r.e1 = static_cast<double>(r.errors1) / n;
      r.e2 = static_cast<double>(r.errors2) / n;
      r.e = 0.5 * (r.e1 + r.e2);
      r.se1 = std::sqrt(r.e1 * (1.0 - r.e1) / n);
      r.se2 = std::sqrt(r.e2 * (1.0 - r.e2) / n);
      r.se = 0.5 * std::hypot(r.se1, r.se2);
    }
    result.rates.push_back(r);
  }

  std::map<std::string, long long> note_counts;
  for (const auto& note : rep_notes)
    if (!note.empty()) ++note_counts[note];
  for (const auto& [msg, count] : note_counts)
    result.notes.push_back(msg + " (" + std::to_string(count) +
                           " replications)");
  return result;
}

}  // namespace spike
