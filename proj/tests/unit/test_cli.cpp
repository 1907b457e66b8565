#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "adamlab/cli.hpp"
#include "adamlab/io.hpp"

using namespace adamlab;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fresh_dir(const std::string& name) {
  const fs::path d = fs::path(::testing::TempDir()) / ("adamlab_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d.string();
}

std::vector<std::string> manifest(const std::string& out) {
  std::vector<std::string> paths;
  std::istringstream in(out);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("artifact ", 0) == 0) paths.push_back(line.substr(9));
  }
  return paths;
}

double field(const std::string& out, const std::string& key) {
  const auto pos = out.find(key + " ");
  if (pos == std::string::npos) return std::nan("");
  return std::strtod(out.c_str() + pos + key.size() + 1, nullptr);
}

}  // namespace

TEST(Cli, ExitCodeTable) {
  const std::string dir = fresh_dir("codes");
  struct Row {
    std::vector<std::string> args;
    int code;
  };
  const std::vector<Row> table = {
      {{}, kExitUsage},
      {{"bogus"}, kExitUsage},
      {{"run"}, kExitUsage},
      {{"run", "--problem", "nope"}, kExitUsage},
      {{"run", "--problem", "divpw", "--epochs", "2", "--iters", "2"}, kExitUsage},
      {{"run", "--problem", "divpw", "--beta1", "1.5", "--out-dir", dir}, kExitUsage},
      {{"run", "--problem", "divpw", "--n", "2", "--out-dir", dir}, kExitUsage},
      {{"run", "--problem", "lsq"}, kExitUsage},
      {{"region", "--res", "1"}, kExitUsage},
      {{"sweep", "--problem", "divpw", "--grid", "5by5"}, kExitUsage},
      {{"concentration", "--problem", "divpw", "--scheme", "cyclic"}, kExitUsage},
      {{"heatmap", "--csv", dir + "/missing.csv"}, kExitRuntime},
      {{"--help"}, kExitOk},
      {{"region", "--n", "5", "--res", "20", "--out-dir", dir}, kExitOk},
      {{"verify", "--trials", "3", "--steps", "100"}, kExitOk},
      {{"run", "--problem", "divpw", "--epochs", "3", "--out-dir", dir}, kExitOk},
  };
  for (const Row& row : table) {
    const Result r = cli(row.args);
    std::string joined;
    for (const auto& a : row.args) joined += a + " ";
    EXPECT_EQ(r.code, row.code) << joined << "\n" << r.err;
  }
}

TEST(Cli, RunArtifactsAreManifestedAndReproducible) {
  const std::string dir = fresh_dir("run");
  const std::vector<std::string> args = {"run", "--problem", "divpw", "--n", "20", "--a", "1",
                                         "--beta1", "0", "--beta2", "0.1", "--scheme", "cyclic",
                                         "--x0", "-5", "--epochs", "2500", "--eta0", "0.1",
                                         "--eps", "1e-8", "--out-dir", dir};
  const Result a = cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  const auto paths = manifest(a.out);
  ASSERT_EQ(paths.size(), 2u);
  std::vector<std::string> first;
  for (const auto& p : paths) {
    ASSERT_TRUE(fs::exists(p)) << p;
    first.push_back(read_file(p));
  }
  EXPECT_GE(field(a.out, "final_grad_norm"), 10.0 * field(a.out, "initial_grad_norm"));
  const Result b = cli(args);
  ASSERT_EQ(b.code, 0);
  for (std::size_t k = 0; k < paths.size(); ++k) EXPECT_EQ(read_file(paths[k]), first[k]);
  EXPECT_EQ(std::count(first[0].begin(), first[0].end(), '\n'), 50000);
}

TEST(Cli, ConfigFileFlagsWin) {
  const std::string dir = fresh_dir("config");
  const std::string cfg = dir + "/lab.conf";
  write_file(cfg, "# defaults\nproblem = divpw\nbeta2=0.1\nepochs = 5\nbias-correction = true\n");
  const Result r = cli({"run", "--config", cfg, "--beta2", "0.999", "--out-dir", dir});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_file(dir + "/run_summary.csv");
  const std::string row = csv.substr(csv.find('\n') + 1);
  EXPECT_NE(row.find(",0.999,"), std::string::npos) << row;
  EXPECT_NE(row.find(",1,wr,"), std::string::npos) << row;
  EXPECT_NE(row.find(",epochs,5,"), std::string::npos) << row;
  EXPECT_EQ(cli({"run", "--config", dir + "/absent.conf"}).code, kExitUsage);
}

TEST(Cli, ConfigInjectionOrder) {
  const std::string dir = fresh_dir("inject");
  write_file(dir + "/c.conf", "n=5\nbeta1 = 0.3\n");
  const auto args = apply_config_file({"run", "--config", dir + "/c.conf", "--beta1=0.1"});
  EXPECT_EQ(args, (std::vector<std::string>{"run", "--n=5", "--beta1=0.1"}));
}

TEST(Cli, SeedFallsBackToEnvironment) {
  const std::string dir = fresh_dir("seed");
  ::setenv("ADAM_LAB_SEED", "4242", 1);
  const Result r = cli({"run", "--problem", "divpw", "--n", "5", "--scheme", "rr", "--epochs",
                        "3", "--out-dir", dir});
  ::unsetenv("ADAM_LAB_SEED");
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_file(dir + "/run_summary.csv");
  EXPECT_NE(csv.find(",4242,"), std::string::npos);
  ::setenv("ADAM_LAB_SEED", "abc", 1);
  EXPECT_EQ(cli({"run", "--problem", "divpw", "--out-dir", dir}).code, kExitUsage);
  ::unsetenv("ADAM_LAB_SEED");
}

TEST(Cli, RegionAreasAndArtifacts) {
  const std::string dir = fresh_dir("region");
  const Result five = cli({"region", "--n", "5", "--out-dir", dir});
  const Result hundred = cli({"region", "--n", "100", "--out-dir", dir});
  ASSERT_EQ(five.code, 0);
  ASSERT_EQ(hundred.code, 0);
  EXPECT_LE(field(five.out, "area"), field(hundred.out, "area"));
  const auto paths = manifest(five.out);
  ASSERT_EQ(paths.size(), 2u);
  const std::string pgm = read_file(paths[1]);
  EXPECT_EQ(pgm.rfind("P5\n# columns: beta1", 0), 0u);
  EXPECT_NE(pgm.find("\n200 200\n255\n"), std::string::npos);
  const std::string csv = read_file(paths[0]);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 40001);
}

TEST(Cli, SweepCsvHeatmapAndResume) {
  const std::string dir = fresh_dir("sweep");
  const std::vector<std::string> base = {"sweep", "--problem", "divpw", "--n", "5", "--grid",
                                         "4x3", "--epochs", "20", "--eta0", "1", "--out-dir",
                                         dir, "--heatmap", "outcome"};
  auto with_workers = base;
  with_workers.insert(with_workers.end(), {"--workers", "1"});
  const Result a = cli(with_workers);
  ASSERT_EQ(a.code, 0) << a.err;
  const auto paths = manifest(a.out);
  ASSERT_EQ(paths.size(), 2u);
  const std::string csv = read_file(paths[0]);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 13);
  EXPECT_NE(read_file(paths[1]).find("\n4 3\n255\n"), std::string::npos);

  with_workers.back() = "4";
  with_workers.push_back("--resume");
  const Result b = cli(with_workers);
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_NE(b.out.find("resumed 12 cells, computed 0"), std::string::npos);
  EXPECT_EQ(read_file(paths[0]), csv);

  const Result h = cli({"heatmap", "--csv", paths[0], "--value", "final_gap", "--log10"});
  ASSERT_EQ(h.code, 0) << h.err;
  EXPECT_TRUE(fs::exists(dir + "/sweep.pgm"));
  EXPECT_EQ(cli({"heatmap", "--csv", paths[0], "--value", "nope"}).code, kExitUsage);
}

TEST(Cli, ConcentrationReport) {
  const std::string dir = fresh_dir("conc");
  const Result r = cli({"concentration", "--problem", "divpw", "--n", "5", "--beta2", "0.5",
                        "--beta1", "0", "--delta", "0.05", "--iters", "100", "--out-dir", dir});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("precondition_ok false"), std::string::npos);
  EXPECT_NE(r.out.find("verdict none"), std::string::npos);
  EXPECT_EQ(manifest(r.out).size(), 1u);
}

TEST(Cli, HeatmapFromCsvOrientation) {
  const std::string csv =
      "beta1,beta2,v\n0,0,1\n0,0.5,2\n0.5,0,3\n0.5,0.5,nan\n0,0,3\n";
  const ScalarGrid g = heatmap_from_csv(csv, "v", false);
  ASSERT_EQ(g.width, 2u);
  ASSERT_EQ(g.height, 2u);
  EXPECT_EQ(g(0, 0), 2.0);  // mean of two seeds at (0, 0)
  EXPECT_EQ(g(0, 1), 3.0);  // beta1 = 0.5, beta2 = 0
  EXPECT_EQ(g(1, 0), 2.0);  // beta2 = 0.5 is the lower row
  EXPECT_EQ(g(1, 1), 3.0);  // non-finite takes the largest finite value
}
