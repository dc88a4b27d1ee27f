#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgn/cli.hpp"
#include "sgn/io.hpp"

namespace fs = std::filesystem;

namespace {

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("sgn");
  for (const auto& a : args) argv.push_back(a.c_str());
  return sgn::run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sgn_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("solve writes its artifact set and reports success") {
  const fs::path dir = fresh_dir("solve_ok");
  const int rc = cli({"solve", "--n", "30", "--m", "150", "--s", "3", "--seed", "7", "--out",
                      dir.string()});
  CHECK(rc == 0);
  CHECK(fs::exists(dir / "solution.csv"));
  CHECK(fs::exists(dir / "trace.jsonl"));
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "manifest.json"));

  const nlohmann::json summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary["status"] == "converged");
  CHECK(summary["rel_error"].get<double>() <= 1e-5);
  const nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["seed"] == 7);
  CHECK(manifest["method"] == "sgn");
}

TEST_CASE("solve exit code distinguishes non-convergence") {
  const fs::path dir = fresh_dir("solve_budget");
  const int rc = cli({"solve", "--n", "30", "--m", "150", "--s", "3", "--seed", "7",
                      "--max-iters", "1", "--out", dir.string()});
  CHECK(rc == 2);
  const nlohmann::json summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary["status"] == "max_iters");
}

TEST_CASE("solve honors --no-trace and the method switch") {
  const fs::path dir = fresh_dir("solve_notrace");
  const int rc = cli({"solve", "--n", "20", "--m", "100", "--s", "2", "--seed", "5", "--method",
                      "iht", "--no-trace", "--out", dir.string()});
  CHECK((rc == 0 || rc == 2));  // proxy may stall; either is a valid reported outcome
  CHECK_FALSE(fs::exists(dir / "trace.jsonl"));
  const nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["method"] == "iht");
}

TEST_CASE("config file supplies defaults, explicit flags win") {
  const fs::path dir = fresh_dir("cfg");
  const fs::path cfg = dir / "run.json";
  {
    std::ofstream out(cfg);
    out << R"({"n": 30, "m": 150, "s": 3, "seed": 3})";
  }
  const fs::path d1 = dir / "a";
  const fs::path d2 = dir / "b";
  CHECK(cli({"solve", "--config", cfg.string(), "--seed", "7", "--out", d1.string()}) == 0);
  CHECK(cli({"solve", "--n", "30", "--m", "150", "--s", "3", "--seed", "7", "--out",
             d2.string()}) == 0);
  CHECK(slurp(d1 / "solution.csv") == slurp(d2 / "solution.csv"));
  const nlohmann::json manifest = nlohmann::json::parse(slurp(d1 / "manifest.json"));
  CHECK(manifest["seed"] == 7);

  CHECK(cli({"solve", "--config", (dir / "missing.json").string()}) == 64);
}

TEST_CASE("usage errors return 64") {
  CHECK(cli({}) == 64);
  CHECK(cli({"solve", "--n", "30"}) == 64);
  CHECK(cli({"solve", "--n", "30", "--m", "10", "--s", "2", "--bogus"}) == 64);
  CHECK(cli({"nonsense"}) == 64);
  CHECK(cli({"--version"}) == 0);
  CHECK(cli({"--help"}) == 0);
}

TEST_CASE("gen writes a deterministic instance") {
  const fs::path d1 = fresh_dir("gen1");
  const fs::path d2 = fresh_dir("gen2");
  CHECK(cli({"gen", "--n", "8", "--m", "5", "--s", "2", "--seed", "9", "--out", d1.string()}) ==
        0);
  CHECK(cli({"gen", "--n", "8", "--m", "5", "--s", "2", "--seed", "9", "--out", d2.string()}) ==
        0);
  CHECK(slurp(d1 / "y.csv") == slurp(d2 / "y.csv"));
  CHECK(slurp(d1 / "signal.csv") == slurp(d2 / "signal.csv"));

  std::istringstream in(slurp(d1 / "y.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 6);  // header + m
}

TEST_CASE("probe s1 separates rich and starved ensembles") {
  CHECK(cli({"probe", "--mode", "s1", "--n", "6", "--m", "10", "--seed", "2"}) == 0);
  CHECK(cli({"probe", "--mode", "s1-check", "--n", "6", "--m", "10", "--seed", "2"}) == 0);
  // one measurement: two diagonal entries always share a sign for n >= 3
  CHECK(cli({"probe", "--mode", "s1", "--n", "6", "--m", "1", "--seed", "2"}) == 1);
}

TEST_CASE("probe collision separates rich and starved ensembles") {
  const fs::path dir = fresh_dir("probe_col");
  // two measurements against four support degrees of freedom: the scan should
  // land a collision on some support pair within a small budget
  CHECK(cli({"probe", "--mode", "collision", "--n", "6", "--m", "2", "--s", "2", "--budget",
             "50", "--seed", "3", "--out", dir.string()}) == 1);
  const nlohmann::json report = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(report["found"] == true);
  CHECK(report["residual"].get<double>() <= 1e-8);
  CHECK(report["separation"].get<double>() >= 1e-3);
  CHECK(report["support_x"].size() == 2);

  CHECK(cli({"probe", "--mode", "collision", "--n", "6", "--m", "12", "--s", "2", "--budget",
             "4", "--seed", "3"}) == 0);

  // sparsity above the dimension is a contradiction surfaced as a runtime error
  CHECK(cli({"probe", "--mode", "collision", "--n", "3", "--m", "4", "--s", "5"}) == 3);
}

TEST_CASE("sweep runs an explicit grid and stays deterministic across jobs") {
  const fs::path d1 = fresh_dir("sweep1");
  const fs::path d2 = fresh_dir("sweep2");
  const std::vector<std::string> base{"sweep",   "--experiment", "phase_map", "--n",
                                      "10",      "--m-list",     "20,30",     "--s-list",
                                      "2",       "--methods",    "sgn",       "--trials",
                                      "2",       "--seed",       "3",         "--max-iters",
                                      "25",      "--raw"};
  std::vector<std::string> run1 = base;
  run1.insert(run1.end(), {"--jobs", "1", "--out", d1.string()});
  std::vector<std::string> run2 = base;
  run2.insert(run2.end(), {"--jobs", "2", "--out", d2.string()});
  CHECK(cli(run1) == 0);
  CHECK(cli(run2) == 0);
  CHECK(slurp(d1 / "sweep.csv") == slurp(d2 / "sweep.csv"));
  CHECK(fs::exists(d1 / "raw.jsonl"));
  CHECK(fs::exists(d1 / "manifest.json"));

  std::istringstream in(slurp(d1 / "sweep.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);  // header + 2 cells x 1 method
}
