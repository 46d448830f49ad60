#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "commands.hpp"
#include "config.hpp"

namespace fs = std::filesystem;
using mfchain::cli::run_cli;
using nlohmann::json;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("mfchain_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  std::string config(const std::string& name, const json& doc) {
    auto path = root_ / name;
    std::ofstream(path) << doc.dump(2);
    return path.string();
  }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run_cli(args, out_, err_);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  fs::path root_;
  std::ostringstream out_;
  std::ostringstream err_;
};

json small_ex1() {
  return {{"problem", "ex1"}, {"n_paths", 3000}, {"grid", 32}, {"paths_to_write", 3}};
}

}  // namespace

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"bogus"}), 2);
  EXPECT_EQ(run({"simulate", "--no-such-flag"}), 2);
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_NE(out_.str().find("riccati-table"), std::string::npos);
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  EXPECT_EQ(run({"simulate", "--config", config("bad.json", {{"n_pathz", 10}}), "--out", (root_ / "o").string()}), 2);
  EXPECT_NE(err_.str().find("n_pathz"), std::string::npos);
  EXPECT_EQ(run({"simulate", "--config", config("neg.json", {{"n_paths", -5}}), "--out", (root_ / "o").string()}), 2);
  EXPECT_EQ(run({"simulate", "--config", (root_ / "missing.json").string()}), 2);
  EXPECT_EQ(run({"simulate", "--config", config("ctl.json", {{"control", "bang"}})}), 2);
}

TEST_F(CliTest, EmptyRiccatiTableIsHeaderOnly) {
  auto out = root_ / "table";
  json doc = {{"riccati", json::array({{{"a", 0}, {"b", 1}, {"alpha", json::array()}, {"m0", {0.0}}}})}};
  ASSERT_EQ(run({"riccati-table", "--config", config("t.json", doc), "--out", out.string()}), 0);
  EXPECT_EQ(slurp(out / "riccati_table.csv"), "a,b,alpha,m0,exit_time\n");
}

TEST_F(CliTest, RiccatiTableRows) {
  auto out = root_ / "table";
  json doc = {{"riccati", json::array({{{"a", 0}, {"b", 1}, {"alpha", {0.1, 0.5}}, {"m0", {0.0}}}})}};
  ASSERT_EQ(run({"riccati-table", "--config", config("t.json", doc), "--out", out.string()}), 0);
  auto csv = slurp(out / "riccati_table.csv");
  EXPECT_NE(csv.find("0,1,0.1,0.0,inf\n"), std::string::npos);
  EXPECT_NE(csv.find("0,1,0.5,0.0,1.5707"), std::string::npos);
}

TEST_F(CliTest, ManifestHashesEveryArtifact) {
  auto out = root_ / "sim";
  ASSERT_EQ(run({"simulate", "--config", config("c.json", small_ex1()), "--out", out.string()}), 0) << err_.str();
  auto manifest = json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest.at("command"), "simulate");
  EXPECT_EQ(manifest.at("seed"), 42);
  ASSERT_EQ(manifest.at("artifacts").size(), 4u);
  for (const auto& a : manifest.at("artifacts")) {
    auto bytes = slurp(out / a.at("path").get<std::string>());
    EXPECT_EQ(a.at("bytes"), bytes.size());
    EXPECT_EQ(a.at("sha256"), mfchain::cli::sha256_hex(bytes));
  }
  EXPECT_TRUE(fs::exists(out / "paths" / "path_000002.csv"));
}

TEST_F(CliTest, Sha256KnownVector) {
  EXPECT_EQ(mfchain::cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_F(CliTest, OutputIndependentOfThreadCount) {
  auto cfg = config("c.json", small_ex1());
  ::setenv("SOLVER_THREADS", "1", 1);
  ASSERT_EQ(run({"simulate", "--config", cfg, "--out", (root_ / "one").string()}), 0);
  ::setenv("SOLVER_THREADS", "3", 1);
  ASSERT_EQ(run({"simulate", "--config", cfg, "--out", (root_ / "three").string()}), 0);
  ::unsetenv("SOLVER_THREADS");
  EXPECT_EQ(slurp(root_ / "one" / "manifest.json"), slurp(root_ / "three" / "manifest.json"));
}

TEST_F(CliTest, SeedFlagOverridesConfig) {
  auto cfg = config("c.json", small_ex1());
  ASSERT_EQ(run({"simulate", "--config", cfg, "--out", (root_ / "a").string(), "--seed", "7"}), 0);
  ASSERT_EQ(run({"simulate", "--config", cfg, "--out", (root_ / "b").string()}), 0);
  EXPECT_EQ(json::parse(slurp(root_ / "a" / "manifest.json")).at("seed"), 7);
  EXPECT_NE(slurp(root_ / "a" / "simulate_summary.json"), slurp(root_ / "b" / "simulate_summary.json"));
}

TEST_F(CliTest, ValidatePassesAndShiftedControlFails) {
  auto doc = small_ex1();
  ASSERT_EQ(run({"validate", "--config", config("ok.json", doc), "--out", (root_ / "ok").string()}), 0) << out_.str();
  auto report = json::parse(slurp(root_ / "ok" / "validate.json"));
  EXPECT_EQ(report.at("all_pass"), true);
  for (const char* check : {"martingale", "stationarity", "dynkin_identity"})
    EXPECT_TRUE(report.at("checks").contains(check)) << check;
  doc["control_shift"] = 0.5;
  EXPECT_EQ(run({"validate", "--config", config("shift.json", doc), "--out", (root_ / "bad").string()}), 1);
}

TEST_F(CliTest, SolveWritesFieldAndControl) {
  auto out = root_ / "solve";
  ASSERT_EQ(run({"solve", "--config", config("c.json", small_ex1()), "--out", out.string()}), 0) << err_.str();
  for (const char* name : {"adjoint.csv", "control.csv", "control_summary.json", "closed_form_deltas.json"})
    EXPECT_TRUE(fs::exists(out / name)) << name;
  auto summary = json::parse(slurp(out / "control_summary.json"));
  EXPECT_EQ(summary.at("converged"), true);
}

TEST_F(CliTest, UnconvergedSolveExitsOne) {
  json doc = {{"problem", "ex2"}, {"n_paths", 2000}, {"grid", 16}, {"max_rounds", 1}, {"coupled_tol", 1e-12}};
  EXPECT_EQ(run({"solve", "--config", config("c.json", doc), "--out", (root_ / "o").string()}), 1);
}

TEST_F(CliTest, CostReportsBothEstimators) {
  auto out = root_ / "cost";
  auto doc = small_ex1();
  doc["control"] = 1.0;
  ASSERT_EQ(run({"cost", "--config", config("c.json", doc), "--out", out.string()}), 0) << err_.str();
  auto cost = json::parse(slurp(out / "cost.json"));
  EXPECT_EQ(cost.at("direct").at("estimator"), "direct");
  EXPECT_EQ(cost.at("reweighted").at("estimator"), "reweighted");
  EXPECT_EQ(cost.at("agree_within_3se"), true);
}

TEST_F(CliTest, CustomProblemRuns) {
  json doc = {{"problem", "custom"},
              {"n_paths", 2000},
              {"grid", 16},
              {"custom",
               {{"states", {0, 1, 2}},
                {"generator", {{-1, 1, 0}, {1, -2, 1}, {0, 1, -1}}},
                {"controlled", {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}},
                {"terminal", {0.0, 1.0, 2.0}},
                {"x0", 0}}}};
  EXPECT_EQ(run({"solve", "--config", config("c.json", doc), "--out", (root_ / "o").string()}), 0) << err_.str();
}
