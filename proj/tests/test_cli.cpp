#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <spike/dataset.hpp>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

// End-to-end checks against the installed command-line binary. Every test
// works through real files and the process exit status, exactly like a user.

namespace {

using nlohmann::json;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args, const std::string& env = "") {
  const std::string out = "cli_stdout.tmp", err = "cli_stderr.tmp";
  std::string cmd;
  if (!env.empty()) cmd += "env " + env + " ";
  cmd += std::string(SPIKE_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
  const int status = std::system(cmd.c_str());
  RunResult r;
  if (status != -1 && WIFEXITED(status)) r.code = WEXITSTATUS(status);
  r.out = slurp(out);
  r.err = slurp(err);
  std::remove(out.c_str());
  std::remove(err.c_str());
  return r;
}

struct Dataset {
  int p = 12;
  std::vector<std::vector<double>> rows;  // samples
  std::vector<int> labels;
};

Dataset make_data(std::uint64_t seed, int n1, int n2, double gap) {
  Dataset d;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int j = 0; j < n1 + n2; ++j) {
    const int label = j < n1 ? 1 : 2;
    std::vector<double> row(d.p);
    for (int g = 0; g < d.p; ++g) row[g] = noise(rng);
    if (label == 2) row[0] += gap;
    d.rows.push_back(row);
    d.labels.push_back(label);
  }
  return d;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_samples_as_rows(const Dataset& d, const std::string& path,
                           bool labeled = true) {
  std::ofstream f(path);
  for (int g = 0; g < d.p; ++g) f << (g ? "," : "") << "f" << g;
  if (labeled) f << ",label";
  f << "\n";
  for (std::size_t j = 0; j < d.rows.size(); ++j) {
    for (int g = 0; g < d.p; ++g) f << (g ? "," : "") << fmt(d.rows[j][g]);
    if (labeled) f << "," << d.labels[j];
    f << "\n";
  }
}

void write_features_as_rows(const Dataset& d, const std::string& path) {
  std::ofstream f(path);
  f << "name";
  for (std::size_t j = 0; j < d.rows.size(); ++j) f << ",s" << j + 1;
  f << "\nlabel";
  for (int label : d.labels) f << "," << label;
  f << "\n";
  for (int g = 0; g < d.p; ++g) {
    f << "f" << g;
    for (const auto& row : d.rows) f << "," << fmt(row[g]);
    f << "\n";
  }
}

std::vector<int> predicted_labels(const json& report, const char* method) {
  std::vector<int> out;
  for (const auto& row : report.at("predictions"))
    out.push_back(row.at("methods").at(method).at("label").get<int>());
  return out;
}

}  // namespace

TEST_CASE("usage errors carry the configuration exit code") {
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("spectra").code == 2);  // --input is required
  CHECK(run_cli("simulate --scenario s9 --p 64 --reps 2").code == 2);
  CHECK(run_cli("simulate --scenario s1 --p 16 --reps 2").code == 2);
  CHECK(run_cli("classify --train x.csv --test y.csv --k fixed-from-full")
            .code == 2);
}

TEST_CASE("missing and malformed inputs carry the ingestion exit code") {
  CHECK(run_cli("spectra --input does_not_exist.csv").code == 3);
  {
    std::ofstream f("bad_cells.csv");
    f << "f0,f1,label\n1.0,nan,1\n2.0,3.0,2\n";
  }
  const RunResult r = run_cli("loocv --input bad_cells.csv");
  CHECK(r.code == 3);
  CHECK(r.err.find("f1") != std::string::npos);  // names the bad column
  {
    std::ofstream f("bad_label.csv");
    f << "f0,label\n1.0,1\n2.0,3\n";
  }
  CHECK(run_cli("spectra --input bad_label.csv").code == 3);
  std::remove("bad_cells.csv");
  std::remove("bad_label.csv");
}

TEST_CASE("spectral report runs end to end") {
  const Dataset train = make_data(401, 8, 9, 6.0);
  write_samples_as_rows(train, "cli_train.csv");
  const RunResult r =
      run_cli("spectra --input cli_train.csv --csv cli_table.csv");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("kind") == "spectra");
  CHECK(j.at("classes")[0].at("n") == 8);
  CHECK(j.at("classes")[1].at("n") == 9);
  const std::string table = slurp("cli_table.csv");
  CHECK(table.rfind("class,r,", 0) == 0);

  const RunResult to_file =
      run_cli("spectra --input cli_train.csv --out cli_spectra.json");
  REQUIRE(to_file.code == 0);
  CHECK(to_file.out.empty());
  CHECK(json::parse(slurp("cli_spectra.json")) == j);
  std::remove("cli_table.csv");
  std::remove("cli_spectra.json");
  std::remove("cli_train.csv");
}

TEST_CASE("classification agrees across file orientations") {
  const Dataset train = make_data(402, 8, 8, 8.0);
  const Dataset test = make_data(403, 3, 3, 8.0);
  write_samples_as_rows(train, "cli_train_rows.csv");
  write_features_as_rows(train, "cli_train_cols.csv");
  write_samples_as_rows(test, "cli_test.csv");

  const RunResult by_rows =
      run_cli("classify --train cli_train_rows.csv --test cli_test.csv");
  REQUIRE(by_rows.code == 0);
  const json a = json::parse(by_rows.out);
  CHECK(a.at("kind") == "classify");
  CHECK(a.at("n_train") == json::array({8, 8}));
  CHECK(a.at("predictions").size() == 6);

  // Labeled test data also yields error rates, and the labels are perfect
  // for this gap.
  REQUIRE(a.contains("error_rates"));
  for (const auto& e : a.at("error_rates")) CHECK(e.at("e") == 0.0);
  for (const auto& row : a.at("predictions")) CHECK(row.contains("label"));

  // The transposed layout must produce identical decisions; the
  // orientation flag covers both files. (Sample names come from the header
  // there, so compare predictions by method.)
  write_features_as_rows(test, "cli_test2.csv");
  const RunResult by_cols = run_cli(
      "classify --train cli_train_cols.csv --features-as-rows --test "
      "cli_test2.csv");
  REQUIRE(by_cols.code == 0);
  const json b = json::parse(by_cols.out);
  for (const char* m : {"dbda", "tdbda", "dlda", "dqda"})
    CHECK(predicted_labels(a, m) == predicted_labels(b, m));

  std::remove("cli_train_rows.csv");
  std::remove("cli_train_cols.csv");
  std::remove("cli_test.csv");
  std::remove("cli_test2.csv");
}

TEST_CASE("unlabeled test files yield predictions without error rates") {
  const Dataset train = make_data(404, 8, 8, 8.0);
  Dataset test = make_data(405, 2, 2, 8.0);
  write_samples_as_rows(train, "cli_train.csv");
  write_samples_as_rows(test, "cli_test_unlabeled.csv", false);
  const RunResult r = run_cli(
      "classify --train cli_train.csv --test cli_test_unlabeled.csv "
      "--unlabeled-test --methods dbda --k 0,0");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(!j.contains("error_rates"));
  CHECK(j.at("k") == json::array({0, 0}));
  CHECK(j.at("predictions").size() == 4);
  CHECK(!j.at("predictions")[0].contains("label"));
  CHECK(predicted_labels(j, "dbda") == std::vector<int>({1, 1, 2, 2}));
  CHECK(run_cli("classify --train cli_train.csv --test cli_test_unlabeled.csv "
                "--unlabeled-test --methods tdbda_oracle")
            .code == 2);
  std::remove("cli_train.csv");
  std::remove("cli_test_unlabeled.csv");
}

TEST_CASE("cross-validation writes both table and report") {
  const Dataset train = make_data(406, 8, 8, 8.0);
  write_samples_as_rows(train, "cli_train.csv");
  const RunResult r = run_cli(
      "loocv --input cli_train.csv --methods dbda,tdbda --k fixed-from-full "
      "--json cli_loocv.json");
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("method,e1,e2,e,errors1,errors2,n1,n2\n", 0) == 0);
  CHECK(r.out.find("dbda,0,0,0,0,0,8,8") != std::string::npos);
  const json j = json::parse(slurp("cli_loocv.json"));
  CHECK(j.at("n1") == 8);
  CHECK(j.contains("k_full"));
  CHECK(j.at("methods").size() == 2);
  std::remove("cli_loocv.json");
  std::remove("cli_train.csv");
}

TEST_CASE("compressed input files are read transparently") {
  const Dataset d = make_data(407, 6, 6, 7.0);
  spike::DatasetTable table;
  table.features.resize(d.p, static_cast<int>(d.rows.size()));
  for (std::size_t j = 0; j < d.rows.size(); ++j)
    for (int g = 0; g < d.p; ++g) table.features(g, j) = d.rows[j][g];
  table.labels.assign(d.labels.begin(), d.labels.end());
  for (int g = 0; g < d.p; ++g)
    table.feature_names.push_back("f" + std::to_string(g));
  for (std::size_t j = 0; j < d.rows.size(); ++j)
    table.sample_names.push_back("s" + std::to_string(j + 1));
  table.label_name = "label";
  spike::write_csv(table, "cli_gz_train.csv.gz");

  const RunResult r = run_cli("spectra --input cli_gz_train.csv.gz");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("classes")[0].at("n") == 6);
  CHECK(j.at("classes")[1].at("n") == 6);
  std::remove("cli_gz_train.csv.gz");
}

TEST_CASE("simulation reports are reproducible across worker counts") {
  const std::string args =
      "simulate --scenario s1 --p 64 --reps 6 --seed 9 --methods "
      "dbda,tdbda_oracle";
  const RunResult serial = run_cli(args, "SPIKE_THREADS=1");
  const RunResult threaded = run_cli(args, "SPIKE_THREADS=3");
  REQUIRE(serial.code == 0);
  REQUIRE(threaded.code == 0);
  CHECK(serial.out == threaded.out);
  const json j = json::parse(serial.out);
  CHECK(j.at("reps") == 6);
  CHECK(j.at("oracle").at("delta") == 8.0);
  CHECK(j.at("results").size() == 2);
  const long long ev = j.at("results")[0].at("evaluated").get<long long>();
  const long long sk = j.at("results")[0].at("skipped").get<long long>();
  CHECK(ev + sk == 6);
}
