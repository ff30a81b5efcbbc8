#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vrpo/experiment.hpp"
#include "vrpo/games.hpp"

using namespace vrpo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir(const char* tag) {
    path = fs::temp_directory_path() /
           (std::string("vrpo_") + tag + "_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig tiny_config(const TempDir& dir) {
  ExperimentConfig config;
  config.game = "matching_pennies_imperfect";
  config.algo = "vrpo";
  config.out_dir = dir.path.string();
  config.seeds = {7};
  config.trainer.batch_size = 32;
  config.trainer.total_iters = 12;
  config.trainer.eval_interval = 4;
  return config;
}

}  // namespace

TEST_CASE("config file parsing and overrides") {
  TempDir dir("cfg");
  const std::string path = (dir.path / "exp.cfg").string();
  std::ofstream(path) << "# comment\n"
                         "game = kuhn\n"
                         "algo = mappo\n"
                         "batch_size = 64  # inline comment\n"
                         "seeds = 1,2,3\n"
                         "lambda = 0.9\n";
  auto config = load_config_file(path);
  CHECK(config.game == "kuhn");
  CHECK(config.algo == "mappo");
  CHECK(config.trainer.batch_size == 64);
  CHECK(config.seeds == std::vector<uint64_t>{1, 2, 3});
  CHECK(config.trainer.lambda == 0.9);

  apply_override(config, "algo", "vrpo");
  CHECK(config.algo == "vrpo");
  CHECK_THROWS_AS(apply_override(config, "no_such_key", "1"), InvalidConfig);
  CHECK_THROWS_AS(apply_override(config, "batch_size", "abc"), InvalidConfig);
}

TEST_CASE("invalid configs name the offending field") {
  ExperimentConfig config;
  config.game = "foo";
  try {
    config.validate();
    FAIL("expected InvalidConfig");
  } catch (const InvalidConfig& e) {
    CHECK(std::string(e.what()).find("foo") != std::string::npos);
    CHECK(std::string(e.what()).find("game") != std::string::npos);
  }

  config.game = "kuhn";
  config.algo = "sarsa";
  CHECK_THROWS_AS(config.validate(), InvalidConfig);
  config.algo = "vrpo";
  config.seeds.clear();
  CHECK_THROWS_AS(config.validate(), InvalidConfig);
  config.seeds = {1};
  config.trainer.batch_size = 30;
  CHECK_THROWS_AS(config.validate(), InvalidConfig);
}

TEST_CASE("run writes csv, checkpoint and summary per seed") {
  TempDir dir("run");
  auto config = tiny_config(dir);
  config.seeds = {3, 4};
  const auto artifacts = run(config);
  REQUIRE(artifacts.size() == 2);
  for (const auto& art : artifacts) {
    const std::string csv = slurp(art.metrics_csv);
    // Header plus one row per iteration.
    CHECK(std::count(csv.begin(), csv.end(), '\n') ==
          config.trainer.total_iters + 1);
    CHECK(csv.rfind(kMetricsHeader, 0) == 0);
    CHECK(fs::exists(art.checkpoint));
    const std::string summary = slurp(art.summary_json);
    CHECK(summary.find("final_exploitability") != std::string::npos);
    CHECK(!std::isnan(art.final_exploitability));
  }

  // Exploitability column is blank off the evaluation cadence.
  std::ifstream csv(artifacts[0].metrics_csv);
  std::string line;
  std::getline(csv, line);  // header
  for (int it = 1; it <= config.trainer.total_iters; ++it) {
    std::getline(csv, line);
    const auto first_comma = line.find(',');
    const auto second_comma = line.find(',', first_comma + 1);
    const bool blank = second_comma == first_comma + 1;
    CHECK(blank == (it % config.trainer.eval_interval != 0));
  }
}

TEST_CASE("same config and seed give byte-identical csvs") {
  TempDir dir_a("det_a");
  TempDir dir_b("det_b");
  auto config_a = tiny_config(dir_a);
  auto config_b = tiny_config(dir_b);
  const auto a = run(config_a);
  const auto b = run(config_b);
  CHECK(slurp(a[0].metrics_csv) == slurp(b[0].metrics_csv));
}

TEST_CASE("output root env var prefixes relative out dirs") {
  CHECK(resolve_out_dir("/abs/path") == "/abs/path");
  ::setenv("VRPO_OUTPUT_ROOT", "/tmp/vrpo_root", 1);
  CHECK(resolve_out_dir("runs") == "/tmp/vrpo_root/runs");
  CHECK(resolve_out_dir("/abs/path") == "/abs/path");
  ::unsetenv("VRPO_OUTPUT_ROOT");
  CHECK(resolve_out_dir("runs") == "runs");
}

TEST_CASE("variance report: oracle-seeded critics on the pennies tree") {
  TempDir dir("var");
  ExperimentConfig config = tiny_config(dir);
  config.oracle_critic_init = true;
  config.trainer.batch_size = 64;
  config.trainer.lambda = 1.0;  // the +/-1 estimates need the full trace

  const std::string path = variance_report(
      config, 2, {"vrpo", "mappo"}, (dir.path / "var.csv").string());
  std::ifstream csv(path);
  std::string header, row1;
  std::getline(csv, header);
  CHECK(header ==
        "iteration,adv_std_vrpo,adv_std_p1_vrpo,adv_std_mappo,"
        "adv_std_p1_mappo");
  std::getline(csv, row1);
  std::stringstream ss(row1);
  std::vector<std::string> cells;
  for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
  REQUIRE(cells.size() == 5);
  CHECK(cells[0] == "1");
  // The first seat's true advantages are all zero at the uniform profile,
  // and the exact-critic estimates are pathwise exact.
  CHECK(std::stod(cells[2]) <= 1e-9);
  // GAE keeps the +/-1 future-action noise at the root decisions.
  CHECK(std::stod(cells[4]) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("variance report with an empty iteration range") {
  TempDir dir("var0");
  ExperimentConfig config = tiny_config(dir);
  const std::string path =
      variance_report(config, 0, {"vrpo"}, (dir.path / "var0.csv").string());
  CHECK(slurp(path) == "iteration,adv_std_vrpo,adv_std_p1_vrpo\n");
}

TEST_CASE("figure1 demo asserts the annotated values") {
  const std::string report = figure1_demo();
  CHECK(report.find("gae = -1") != std::string::npos);
  CHECK(report.find("boost = 0") != std::string::npos);
  CHECK(report.find("Q1(h,t) = -1") != std::string::npos);
}

TEST_CASE("metrics csv row formatting") {
  IterationMetrics m;
  m.iteration = 3;
  m.adv_std = 0.5;
  // NaN exploitability renders as an empty field.
  const std::string row = metrics_csv_row(m);
  CHECK(row.rfind("3,,0.5,", 0) == 0);
}
