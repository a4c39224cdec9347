#pragma once

#include "spike/loocv.hpp"
#include "spike/montecarlo.hpp"
#include "spike/spectra_report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>

namespace spike {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json json_vector(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline Json json_class_spectra(const ClassSpectraReport& c) {
  Json j;
  j["label"] = c.label;
  j["n"] = c.n;
  j["p"] = c.p;
  j["trace"] = c.trace_s;
  j["k_hat"] = c.k_hat;
  j["nr_eigvals"] = json_vector(c.nr_eigvals);
  j["acute_eigvals"] = json_vector(c.acute_eigvals);
  j["eps_hat"] = json_vector(c.eps_hat);
  j["eta_hat"] = json_vector(c.eta_hat);
  j["tau_hat"] = json_vector(c.tau_hat);
  j["tau_tilde"] = json_vector(c.tau_tilde);
  if (!c.warning.empty()) j["warning"] = c.warning;
  return j;
}

inline void csv_cell(std::string& out, const Vector& v, Eigen::Index r) {
  out += ',';
  if (r < v.size()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v[r]);
    out += buf;
  }
}

}  // namespace detail

inline Json spectra_json(const SpectraReport& report) {
  Json j;
  j["schema_version"] = 1;
  j["kind"] = "spectra";
  j["classes"] = Json::array(
      {detail::json_class_spectra(report.c1), detail::json_class_spectra(report.c2)});
  return j;
}

/// Long-format table, one row per (class, component), empty cells where a
/// sequence is shorter.
inline std::string spectra_csv(const SpectraReport& report) {
  std::string out =
      "class,r,nr_eigval,acute_eigval,eps_hat,eta_hat,tau_hat,tau_tilde\n";
  for (const auto* c : {&report.c1, &report.c2}) {
    const Eigen::Index rows = std::max(
        {c->nr_eigvals.size(), c->acute_eigvals.size(), c->eps_hat.size(),
         c->eta_hat.size(), c->tau_hat.size(), c->tau_tilde.size()});
    for (Eigen::Index r = 0; r < rows; ++r) {
      out += std::to_string(c->label);
      out += ',';
      out += std::to_string(r + 1);
      detail::csv_cell(out, c->nr_eigvals, r);
      detail::csv_cell(out, c->acute_eigvals, r);
      detail::csv_cell(out, c->eps_hat, r);
      detail::csv_cell(out, c->eta_hat, r);
      detail::csv_cell(out, c->tau_hat, r);
      detail::csv_cell(out, c->tau_tilde, r);
      out += '\n';
    }
  }
  return out;
}

inline Json simulate_json(const Scenario& scenario,
                          const MonteCarloConfig& config,
                          const MonteCarloResult& result) {
  Json j;
  j["schema_version"] = 1;
  j["kind"] = "simulate";
  j["scenario"] = scenario.spec.id;
  j["p"] = scenario.spec.p;
  j["n1"] = scenario.spec.n1;
  j["n2"] = scenario.spec.n2;
  j["reps"] = result.reps;
  j["seed"] = config.seed;
  if (config.k)
    j["k"] = Json::array({config.k->first, config.k->second});
  else
    j["k"] = nullptr;
  j["center"] = config.center;
  j["fixed_training"] = config.fixed_training;

  const OracleDeltas deltas = oracle_deltas(scenario.truth);
  const AsymptoticError asym = asymptotic_error(deltas);
  Json oracle;
  oracle["delta"] = deltas.delta;
  oracle["delta_transformed"] = deltas.delta_a;
  oracle["sd_new_observation"] = Json::array({deltas.d_o[0], deltas.d_o[1]});
  oracle["sd"] = Json::array({deltas.d[0], deltas.d[1]});
  oracle["sd_new_observation_transformed"] =
      Json::array({deltas.d_oa[0], deltas.d_oa[1]});
  oracle["sd_transformed"] = Json::array({deltas.d_a[0], deltas.d_a[1]});
  oracle["asymptotic_error"] = Json::array({asym.e[0], asym.e[1]});
  oracle["asymptotic_error_transformed"] =
      Json::array({asym.e_a[0], asym.e_a[1]});
  j["oracle"] = oracle;

  Json rates = Json::array();
  for (const auto& r : result.rates) {
    Json m;
    m["method"] = to_string(r.method);
    m["errors"] = Json::array({r.errors1, r.errors2});
    m["evaluated"] = r.evaluated;
    m["skipped"] = r.skipped;
    m["e1"] = r.e1;
    m["e2"] = r.e2;
    m["e"] = r.e;
    m["se1"] = r.se1;
    m["se2"] = r.se2;
    m["se"] = r.se;
    rates.push_back(m);
  }
  j["results"] = rates;
  j["notes"] = result.notes;
  return j;
}

inline Json loocv_json(const LoocvResult& result) {
  Json j;
  j["schema_version"] = 1;
  j["kind"] = "loocv";
  j["n1"] = result.n1;
  j["n2"] = result.n2;
  if (result.k_full)
    j["k_full"] = Json::array({result.k_full->first, result.k_full->second});
  Json methods = Json::array();
  for (const auto& r : result.methods) {
    Json m;
    m["method"] = to_string(r.method);
    m["errors"] = Json::array({r.errors1, r.errors2});
    m["e1"] = r.e1;
    m["e2"] = r.e2;
    m["e"] = r.e;
    m["predictions1"] = r.predictions1;
    m["predictions2"] = r.predictions2;
    methods.push_back(m);
  }
  j["methods"] = methods;
  j["warnings"] = result.warnings;
  return j;
}

inline std::string loocv_csv(const LoocvResult& result) {
  std::string out = "method,e1,e2,e,errors1,errors2,n1,n2\n";
  char buf[160];
  for (const auto& r : result.methods) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%lld,%lld,%lld,%lld\n",
                  to_string(r.method).c_str(), r.e1, r.e2, r.e, r.errors1,
                  r.errors2, result.n1, result.n2);
    out += buf;
  }
  return out;
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IngestError("cannot write '" + path + "'");
  f << content;
  if (!f) throw IngestError("write error in '" + path + "'");
}

}  // namespace spike
