#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mixvar/cli.hpp"
#include "mixvar/rng.hpp"

namespace fs = std::filesystem;

namespace {

/// Silences the CLI's stdout chatter for the duration of a test.
struct CaptureStdout {
  std::ostringstream sink;
  std::streambuf* saved;
  CaptureStdout() : saved(std::cout.rdbuf(sink.rdbuf())) {}
  ~CaptureStdout() { std::cout.rdbuf(saved); }
};

fs::path make_workdir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mixvar_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// Geometric-random-walk price file, enough rows for fitting.
fs::path write_price_csv(const fs::path& dir, int n_rows, std::uint64_t seed) {
  const fs::path path = dir / "prices.csv";
  std::ofstream out(path);
  out << "Date,Close\n";
  mixvar::Rng rng(seed);
  double price = 100.0;
  for (int i = 0; i < n_rows; ++i) {
    // synthetic calendar: 28-day months keep dates valid, unique, ascending
    const int year = 2015 + i / 336;
    const int month = 1 + (i / 28) % 12;
    const int day = 1 + i % 28;
    out << year << "-" << std::setw(2) << std::setfill('0') << month << "-"
        << std::setw(2) << std::setfill('0') << day << "," << std::setprecision(12)
        << price << "\n";
    price *= std::exp(0.015 * rng.normal());
  }
  return path;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli stats writes a report with embedded config and hash") {
  const fs::path dir = make_workdir("stats");
  const fs::path csv = write_price_csv(dir, 120, 5);
  CaptureStdout mute;
  const int rc = mixvar::cli::run({"stats", "--input", csv.string(), "--out",
                                   (dir / "out").string(), "--seed", "42"});
  REQUIRE(rc == 0);
  const nlohmann::json doc = nlohmann::json::parse(slurp(dir / "out" / "stats.json"));
  CHECK(doc["stats"].contains("kurtosis"));
  CHECK(doc["stats"]["n"] == 119);
  CHECK(doc["meta"]["config"]["subcommand"] == "stats");
  CHECK(doc["meta"]["seed"] == 42);
  CHECK(doc["meta"]["input_hash"].get<std::string>().size() == 16);
  CHECK(doc["meta"].contains("artifact_version"));
}

TEST_CASE("cli stats fails cleanly on bad input") {
  const fs::path dir = make_workdir("stats_bad");
  CaptureStdout mute;
  SUBCASE("missing file") {
    CHECK(mixvar::cli::run({"stats", "--input", (dir / "nope.csv").string()}) != 0);
  }
  SUBCASE("empty file") {
    const fs::path csv = dir / "empty.csv";
    std::ofstream(csv) << "";
    CHECK(mixvar::cli::run({"stats", "--input", csv.string()}) != 0);
  }
  SUBCASE("malformed rows") {
    const fs::path csv = dir / "bad.csv";
    std::ofstream(csv) << "Date,Close\n2020-01-01,abc\n";
    CHECK(mixvar::cli::run({"stats", "--input", csv.string()}) != 0);
  }
}

TEST_CASE("cli fit emits model documents and plot data") {
  const fs::path dir = make_workdir("fit");
  const fs::path csv = write_price_csv(dir, 220, 6);
  const fs::path out = dir / "out";
  CaptureStdout mute;
  const int rc = mixvar::cli::run({"fit", "--input", csv.string(), "--out", out.string(),
                                   "--family", "all", "--g", "1", "--n-starts", "2",
                                   "--seed", "7"});
  REQUIRE(rc == 0);
  for (const char* name : {"model_mmw.json", "model_gmm.json", "model_tmm.json"}) {
    const nlohmann::json doc = nlohmann::json::parse(slurp(out / name));
    CHECK(doc["g"] == 1);
    CHECK(doc["weights"].size() == 1);
    CHECK(doc["meta"]["config"]["family"] == "all");
  }
  const std::string density = slurp(out / "fit_density.csv");
  CHECK(density.find("x,dens_mmw,dens_gmm,dens_tmm") == 0);
  const std::string hist = slurp(out / "fit_histogram.csv");
  CHECK(hist.find("bin_left,bin_right,count,density") == 0);
}

TEST_CASE("cli var writes the summary and the alpha curve") {
  const fs::path dir = make_workdir("var");
  const fs::path csv = write_price_csv(dir, 260, 8);
  const fs::path out = dir / "out";
  CaptureStdout mute;
  const int rc = mixvar::cli::run(
      {"var", "--input", csv.string(), "--out", out.string(), "--family", "mmw", "--g",
       "1", "--n-starts", "1", "--alpha", "0.01", "--alpha", "0.05", "--n-sim", "20000",
       "--grid-max", "0.05", "--grid-step", "0.01", "--seed", "7"});
  REQUIRE(rc == 0);
  const nlohmann::json doc = nlohmann::json::parse(slurp(out / "var_summary.json"));
  const auto& at5 = doc["var_estimates"]["mmw"]["0.05"];
  CHECK(at5.contains("cdf-bisection"));
  CHECK(at5.contains("simulation"));
  const double cdf_v = at5["cdf-bisection"]["value"].get<double>();
  const double sim_v = at5["simulation"]["value"].get<double>();
  const double se = at5["simulation"]["standard_error"].get<double>();
  CHECK(std::fabs(cdf_v - sim_v) <= 3.0 * se);
  CHECK(doc["var_estimates"]["historical"]["0.05"]["historical"]["value"].is_number());

  const std::string curve = slurp(out / "var_curve.csv");
  CHECK(curve.find("alpha,var_mmw,var_hist") == 0);
}

TEST_CASE("cli backtest writes reports and the forecast csv") {
  const fs::path dir = make_workdir("backtest");
  const fs::path csv = write_price_csv(dir, 101, 9);
  const fs::path out = dir / "out";
  CaptureStdout mute;
  const int rc = mixvar::cli::run(
      {"backtest", "--input", csv.string(), "--out", out.string(), "--family", "mmw",
       "--g", "1", "--n-starts", "1", "--alpha", "0.05", "--window", "60", "--seed",
       "11", "--threads", "2"});
  REQUIRE(rc == 0);
  const nlohmann::json doc =
      nlohmann::json::parse(slurp(out / "backtest_mmw_a0.05.json"));
  CHECK(doc["window"] == 60);
  CHECK(doc["forecasts"].size() == 40);
  CHECK(doc["kupiec"].contains("p"));
  CHECK(doc["n_obs"] == 40);
  const std::string fc = slurp(out / "backtest_forecasts_a0.05.csv");
  CHECK(fc.find("date,realized,var_gmm,var_tmm,var_mmw,var_hist") == 0);
  // 40 data lines + header
  CHECK(std::count(fc.begin(), fc.end(), '\n') == 41);
}

TEST_CASE("cli reruns are byte-identical") {
  const fs::path dir = make_workdir("determinism");
  const fs::path csv = write_price_csv(dir, 150, 12);
  CaptureStdout mute;
  auto run_once = [&](const std::string& out) {
    return mixvar::cli::run({"fit", "--input", csv.string(), "--out", out, "--family",
                             "mmw", "--g", "2", "--n-starts", "2", "--seed", "3"});
  };
  REQUIRE(run_once((dir / "a").string()) == 0);
  REQUIRE(run_once((dir / "a").string()) == 0);  // same path: config echo identical
  const std::string first = slurp(dir / "a" / "model_mmw.json");
  REQUIRE(run_once((dir / "a").string()) == 0);
  CHECK(first == slurp(dir / "a" / "model_mmw.json"));
}

TEST_CASE("cli rejects unknown flags and bad families") {
  CaptureStdout mute;
  CHECK(mixvar::cli::run({"fit", "--no-such-flag"}) != 0);
  CHECK(mixvar::cli::run({"bogus-subcommand"}) != 0);
  const fs::path dir = make_workdir("badfam");
  const fs::path csv = write_price_csv(dir, 50, 1);
  CHECK(mixvar::cli::run({"fit", "--input", csv.string(), "--family", "weibullish"}) != 0);
}
