#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "uwc/io.hpp"

namespace fs = std::filesystem;

namespace {

const char* kConfig = R"({
  "seed": 3,
  "scenario": {"kind": "signal_bearing", "length": 2900, "seed": 3},
  "walk_forward": {"t_train": 500, "t_val": 300, "t_test": 500, "embargo": 1},
  "methods": [
    {"id": "uncalibrated", "forecaster": {"kind": "overconfident_sim", "shrink": 0.5, "bias_scale": 0.0, "bias_offset": 0.5}, "calibration": "none"},
    {"id": "uwc", "forecaster": {"kind": "overconfident_sim", "shrink": 0.5, "bias_scale": 0.0, "bias_offset": 0.5}, "calibration": "uwc"}
  ],
  "reference": "uncalibrated",
  "decision": {"gamma": 5.0},
  "friction": {"fee_rate": 0.00005, "impact": "quadratic", "impact_coeff": 0.0001},
  "inference": {"n_boot": 200},
  "drift": {"window": 100}
})";

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("uwc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write("config.json", kConfig);
  }
  void TearDown() override { fs::remove_all(dir_); }

  void write(const std::string& name, const std::string& text) { std::ofstream(dir_ / name) << text; }

  int run(const std::string& args) {
    std::string cmd = std::string(UWC_CLI_PATH) + " " + args + " >" + (dir_ / "stdout.txt").string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }

  std::string p(const std::string& rel) const { return (dir_ / rel).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, FullChainThroughManifests) {
  ASSERT_EQ(run("simulate --config " + p("config.json") + " --out " + p("sim")), 0);
  EXPECT_TRUE(fs::exists(p("sim/market.csv")));
  EXPECT_TRUE(fs::exists(p("sim/manifest_simulate.json")));
  ASSERT_EQ(run("evaluate --manifest " + p("sim/manifest_simulate.json") + " --out " + p("eval")), 0);
  EXPECT_TRUE(fs::exists(p("eval/panel.csv")));
  EXPECT_TRUE(fs::exists(p("eval/summary.json")));
  ASSERT_EQ(run("stress --manifest " + p("eval/manifest_evaluate.json") + " --out " + p("eval")), 0);
  EXPECT_TRUE(fs::exists(p("eval/stress.csv")));
  EXPECT_TRUE(fs::exists(p("eval/cost_grid.csv")));
  ASSERT_EQ(run("monitor --manifest " + p("eval/manifest_evaluate.json") + " --out " + p("eval")), 0);
  EXPECT_TRUE(fs::exists(p("eval/drift.csv")));
  ASSERT_EQ(run("report --manifest " + p("eval/manifest_evaluate.json") + " --out " + p("eval")), 0);
  std::string report = uwc::read_file(p("eval/report.md"));
  EXPECT_NE(report.find("Model risk set"), std::string::npos);
  EXPECT_NE(report.find("Drift monitor"), std::string::npos);
}

TEST_F(Cli, EvaluateTwiceBitwiseIdentical) {
  ASSERT_EQ(run("evaluate --config " + p("config.json") + " --out " + p("a")), 0);
  ASSERT_EQ(run("evaluate --config " + p("config.json") + " --out " + p("b")), 0);
  EXPECT_EQ(uwc::read_file(p("a/panel.csv")), uwc::read_file(p("b/panel.csv")));
  EXPECT_EQ(uwc::read_file(p("a/summary.json")), uwc::read_file(p("b/summary.json")));
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("evaluate --bogus"), 2);
  write("bad.json", R"({"seed": 1, "walk_forwrd": {}})");
  EXPECT_EQ(run("evaluate --config " + p("bad.json") + " --out " + p("x")), 2);
  write("nodata.json", R"({"seed": 1, "market_csv": "does_not_exist.csv",
    "methods": [{"id": "a", "forecaster": {"kind": "ewma_parametric"}, "calibration": "none"}]})");
  EXPECT_EQ(run("evaluate --config " + p("nodata.json") + " --out " + p("x")), 3);
}

TEST_F(Cli, ReportOnEmptyPanelIsAnError) {
  ASSERT_EQ(run("evaluate --config " + p("config.json") + " --out " + p("e")), 0);
  std::ofstream(p("e/panel.csv")) << uwc::kPanelHeader << "\n";
  EXPECT_EQ(run("report --manifest " + p("e/manifest_evaluate.json") + " --out " + p("e")), 3);
}

TEST_F(Cli, OutputDirFromEnvironment) {
  setenv("UWC_OUTPUT_DIR", p("env_out").c_str(), 1);
  EXPECT_EQ(run("simulate --config " + p("config.json")), 0);
  unsetenv("UWC_OUTPUT_DIR");
  EXPECT_TRUE(fs::exists(p("env_out/market.csv")));
}
