// Command-line front end: spectral diagnostics, LOOCV, classification and
// Monte Carlo studies over the library. Exit codes: 0 success, 2
// configuration error, 3 ingestion error, 4 numeric failure.

#include "spike/spike.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace {

using spike::Json;
using spike::Matrix;
using spike::Method;
using spike::Vector;

struct InputArgs {
  std::string path;
  bool features_as_rows = false;
  std::string label_col = "label";
};

void add_input_options(CLI::App* cmd, InputArgs& in, const std::string& flag,
                       const std::string& what) {
  cmd->add_option(flag, in.path, what)->required();
  cmd->add_flag("--features-as-rows", in.features_as_rows,
                "rows are features, columns are samples");
  cmd->add_option("--label-col", in.label_col,
                  "name of the label column (or row)");
}

spike::DatasetTable load(const InputArgs& in) {
  return spike::ingest_csv(in.path,
                           in.features_as_rows
                               ? spike::Orientation::features_as_rows
                               : spike::Orientation::samples_as_rows,
                           in.label_col);
}

std::vector<Method> parse_methods(const std::string& arg) {
  std::vector<Method> methods;
  std::size_t start = 0;
  while (start <= arg.size()) {
    const std::size_t comma = arg.find(',', start);
    const std::string one =
        arg.substr(start, comma == std::string::npos ? comma : comma - start);
    if (!one.empty()) methods.push_back(spike::parse_method(one));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  spike::require(!methods.empty(), "--methods lists no method");
  return methods;
}

// "auto", "fixed-from-full" (where allowed), or "K1,K2".
struct KArg {
  spike::KPolicy policy = spike::KPolicy::per_fold;
  std::pair<int, int> fixed{0, 0};
};

KArg parse_k(const std::string& arg, bool allow_from_full) {
  KArg k;
  if (arg == "auto") return k;
  if (arg == "fixed-from-full") {
    spike::require(allow_from_full,
                   "--k fixed-from-full only applies to loocv");
    k.policy = spike::KPolicy::from_full;
    return k;
  }
  const std::size_t comma = arg.find(',');
  spike::require(comma != std::string::npos,
                 "--k must be auto, fixed-from-full or K1,K2");
  try {
    k.fixed.first = std::stoi(arg.substr(0, comma));
    k.fixed.second = std::stoi(arg.substr(comma + 1));
  } catch (const std::exception&) {
    throw spike::ConfigError("--k must be auto, fixed-from-full or K1,K2");
  }
  spike::require(k.fixed.first >= 0 && k.fixed.second >= 0,
                 "--k counts must be non-negative");
  k.policy = spike::KPolicy::fixed;
  return k;
}

void emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty())
    std::cout << content;
  else
    spike::write_text_file(out_path, content);
}

void emit_json(const Json& j, const std::string& out_path) {
  emit(j.dump(2) + "\n", out_path);
}

void warn_all(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

int run_spectra(const InputArgs& in, const std::string& out_path,
                const std::string& csv_path,
                std::optional<std::uint64_t> shuffle) {
  const spike::DatasetTable table = load(in);
  const Matrix x1 = table.class_matrix(1);
  const Matrix x2 = table.class_matrix(2);
  const spike::SpectraReport report =
      spike::spectra_report(x1, x2, spike::default_gamma, shuffle);
  emit_json(spike::spectra_json(report), out_path);
  if (!csv_path.empty())
    spike::write_text_file(csv_path, spike::spectra_csv(report));
  return 0;
}

int run_loocv(const InputArgs& in, const std::string& methods_arg,
              const std::string& k_arg, bool center,
              std::optional<std::uint64_t> shuffle,
              const std::string& out_path, const std::string& json_path) {
  spike::LoocvConfig config;
  config.methods = parse_methods(methods_arg);
  const KArg k = parse_k(k_arg, true);
  config.k_policy = k.policy;
  config.k_fixed = k.fixed;
  config.center = center;
  config.cdm_shuffle_seed = shuffle;
  const spike::DatasetTable table = load(in);
  const spike::LoocvResult result =
      spike::loocv(table.class_matrix(1), table.class_matrix(2), config);
  warn_all(result.warnings);
  emit(spike::loocv_csv(result), out_path);
  if (!json_path.empty())
    spike::write_text_file(json_path, spike::loocv_json(result).dump(2) + "\n");
  return 0;
}

int run_classify(const InputArgs& train_in, const std::string& test_path,
                 bool unlabeled_test, const std::string& methods_arg,
                 const std::string& k_arg, bool center,
                 std::optional<std::uint64_t> shuffle,
                 const std::string& out_path) {
  const std::vector<Method> methods = parse_methods(methods_arg);
  for (Method m : methods)
    spike::require(m != Method::tdbda_oracle,
                   "the oracle rule needs population structure, not data");
  const KArg k = parse_k(k_arg, false);

  const spike::DatasetTable train = load(train_in);
  InputArgs test_in = train_in;
  test_in.path = test_path;
  if (unlabeled_test) test_in.label_col.clear();
  const spike::DatasetTable test = load(test_in);
  spike::require(test.p() == train.p(),
                 "train and test disagree on the number of features");

  spike::FitOptions opt;
  if (k.policy == spike::KPolicy::fixed) opt.k = k.fixed;
  opt.center = center;
  opt.cdm_shuffle_seed = shuffle;
  const spike::TrainedModel model =
      spike::fit(spike::ClassSample(train.class_matrix(1)),
                 spike::ClassSample(train.class_matrix(2)), opt);
  warn_all(model.warnings);

  Json j;
  j["schema_version"] = 1;
  j["kind"] = "classify";
  j["n_train"] = Json::array({model.c1.n, model.c2.n});
  j["k"] = Json::array({model.c1.k, model.c2.k});
  j["center"] = center;
  j["warnings"] = model.warnings;

  std::vector<std::vector<int>> predicted(methods.size());
  Json rows = Json::array();
  for (Eigen::Index t = 0; t < test.n(); ++t) {
    Json row;
    row["sample"] = test.sample_names[static_cast<std::size_t>(t)];
    if (!test.labels.empty())
      row["label"] = test.labels[static_cast<std::size_t>(t)];
    Json scores;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const spike::Decision d =
          spike::score_with(model, methods[m], test.features.col(t));
      Json one;
      one["label"] = d.label;
      one["score"] = d.score;
      scores[spike::to_string(methods[m])] = one;
      predicted[m].push_back(d.label);
    }
    row["methods"] = scores;
    rows.push_back(row);
  }
  j["predictions"] = rows;

  if (!test.labels.empty()) {
    Json err = Json::array();
    for (std::size_t m = 0; m < methods.size(); ++m) {
      long long n[2] = {0, 0}, wrong[2] = {0, 0};
      for (std::size_t t = 0; t < test.labels.size(); ++t) {
        const int truth = test.labels[t];
        ++n[truth - 1];
        if (predicted[m][t] != truth) ++wrong[truth - 1];
      }
      Json e;
      e["method"] = spike::to_string(methods[m]);
      e["errors"] = Json::array({wrong[0], wrong[1]});
      e["n"] = Json::array({n[0], n[1]});
      const double e1 = n[0] ? static_cast<double>(wrong[0]) / n[0] : 0.0;
      const double e2 = n[1] ? static_cast<double>(wrong[1]) / n[1] : 0.0;
      e["e1"] = e1;
      e["e2"] = e2;
      e["e"] = 0.5 * (e1 + e2);
      err.push_back(e);
    }
    j["error_rates"] = err;
  }
  emit_json(j, out_path);
  return 0;
}

int run_simulate(const std::string& scenario_id, Eigen::Index p,
                 long long reps, std::uint64_t seed,
                 const std::string& methods_arg, const std::string& k_arg,
                 bool center, bool fixed_training,
                 std::optional<std::uint64_t> shuffle,
                 const std::string& out_path) {
  const spike::Scenario scenario = spike::make_scenario(scenario_id, p);
  spike::MonteCarloConfig config;
  config.reps = reps;
  config.seed = seed;
  config.methods = parse_methods(methods_arg);
  const KArg k = parse_k(k_arg, false);
  if (k.policy == spike::KPolicy::fixed) config.k = k.fixed;
  config.center = center;
  config.fixed_training = fixed_training;
  config.cdm_shuffle_seed = shuffle;
  const spike::MonteCarloResult result = spike::monte_carlo(scenario, config);
  warn_all(result.notes);
  emit_json(spike::simulate_json(scenario, config, result), out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Distance-based classification for high-dimension, low-sample-size "
      "data with strongly spiked covariance"};
  app.require_subcommand(1);

  InputArgs spectra_in, loocv_in, classify_in;
  std::string out_path, csv_path, json_path;
  std::string methods = "dbda,tdbda,dlda,dqda";
  std::string k_arg = "auto";
  std::uint64_t shuffle_seed = 0;
  bool has_shuffle = false;
  bool center = true;

  auto* spectra = app.add_subcommand(
      "spectra", "spectral diagnostics of a labelled data set");
  add_input_options(spectra, spectra_in, "--input", "CSV (optionally .gz)");
  spectra->add_option("--out", out_path, "write the JSON report here");
  spectra->add_option("--csv", csv_path, "also write a plot-ready CSV table");

  auto* loocv = app.add_subcommand(
      "loocv", "leave-one-out cross-validated error rates");
  add_input_options(loocv, loocv_in, "--input", "CSV (optionally .gz)");
  loocv->add_option("--methods", methods, "comma-separated method list");
  loocv->add_option("--k", k_arg, "auto, fixed-from-full or K1,K2");
  loocv->add_flag("--center,!--no-center", center,
                  "subtract the pooled training mean in every fold (default on)");
  loocv->add_option("--out", out_path, "write the CSV table here");
  loocv->add_option("--json", json_path, "also write a JSON report");

  auto* classify =
      app.add_subcommand("classify", "fit on one file, classify another");
  add_input_options(classify, classify_in, "--train", "training CSV");
  std::string test_path;
  bool unlabeled_test = false;
  classify->add_option("--test", test_path, "test CSV")->required();
  classify->add_flag("--unlabeled-test", unlabeled_test,
                     "test file has no label column");
  classify->add_option("--methods", methods, "comma-separated method list");
  classify->add_option("--k", k_arg, "auto or K1,K2");
  classify->add_flag("--center,!--no-center", center,
                     "subtract the pooled training mean (default on)");
  classify->add_option("--out", out_path, "write the JSON report here");

  auto* simulate = app.add_subcommand(
      "simulate", "Monte Carlo error-rate study on a synthetic scenario");
  std::string scenario_id;
  Eigen::Index p = 0;
  long long reps = 2000;
  std::uint64_t seed = 1;
  bool sim_center = false;
  bool fixed_training = false;
  simulate->add_option("--scenario", scenario_id, "one of s1..s5")->required();
  simulate->add_option("--p", p, "dimension (>= 32)")->required();
  simulate->add_option("--reps", reps, "replication count");
  simulate->add_option("--seed", seed, "base seed");
  simulate->add_option("--methods", methods, "comma-separated method list");
  simulate->add_option("--k", k_arg, "auto or K1,K2");
  simulate->add_flag("--center", sim_center,
                     "subtract the pooled training mean (default off)");
  simulate->add_flag("--fixed-training", fixed_training,
                     "draw one training set, vary only the test points");
  simulate->add_option("--out", out_path, "write the JSON report here");

  for (auto* cmd : {spectra, loocv, classify, simulate})
    cmd->add_option("--shuffle", shuffle_seed,
                    "seed for shuffling columns before the cross split")
        ->each([&](const std::string&) { has_shuffle = true; });

  try {
    app.parse(argc, argv);
    const std::optional<std::uint64_t> shuffle =
        has_shuffle ? std::optional<std::uint64_t>(shuffle_seed)
                    : std::nullopt;
    if (spectra->parsed())
      return run_spectra(spectra_in, out_path, csv_path, shuffle);
    if (loocv->parsed())
      return run_loocv(loocv_in, methods, k_arg, center, shuffle, out_path,
                       json_path);
    if (classify->parsed())
      return run_classify(classify_in, test_path, unlabeled_test, methods,
                          k_arg, center, shuffle, out_path);
    if (simulate->parsed())
      return run_simulate(scenario_id, p, reps, seed, methods, k_arg,
                          sim_center, fixed_training, shuffle, out_path);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const spike::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const spike::IngestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const spike::InvalidDataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
