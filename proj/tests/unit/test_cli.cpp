#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cli.hpp"
#include "osmm/instance_io.hpp"

namespace osmm::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("osmm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "osmm");
    out_.str("");
    err_.str("");
    return run_cli(args, out_, err_);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

std::vector<double> column(const std::string& csv, const std::string& name) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) header.push_back(cell);
  const auto idx = static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  std::vector<double> values;
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::string cell;
    for (std::size_t i = 0; i <= idx; ++i) std::getline(ls, cell, ',');
    values.push_back(std::stod(cell));
  }
  return values;
}

TEST_F(CliTest, RunWritesDecreasingObjective) {
  ASSERT_EQ(run({"run", "--problem", "kelly", "--n", "10", "--num-samples", "500", "--seed", "0", "--out-dir",
                 dir_.string()}),
            kExitOk)
      << err_.str();
  const auto h = column(slurp(dir_ / "iterations.csv"), "h");
  ASSERT_GE(h.size(), 2u);
  for (std::size_t k = 1; k < h.size(); ++k) EXPECT_LT(h[k], h[k - 1]);
  const auto summary = nlohmann::json::parse(slurp(dir_ / "summary.json"));
  EXPECT_EQ(summary["iters"].get<int>() + 1, static_cast<int>(h.size()));
  EXPECT_TRUE(summary.contains("lower_bound"));
}

TEST_F(CliTest, ProximalGradientModeRuns) {
  EXPECT_EQ(run({"run", "--problem", "kelly", "--n", "10", "--num-samples", "500", "--rank", "0", "--memory",
                 "1", "--out-dir", dir_.string()}),
            kExitOk)
      << err_.str();
}

TEST_F(CliTest, SweepProducesNineRows) {
  ASSERT_EQ(run({"sweep", "--problem", "kelly", "--n", "8", "--num-samples", "300", "--jobs", "3", "--out-dir",
                 dir_.string()}),
            kExitOk)
      << err_.str();
  std::istringstream table(slurp(dir_ / "sweep.csv"));
  std::string line;
  int rows = -1;
  while (std::getline(table, line)) ++rows;
  EXPECT_EQ(rows, 9);
}

TEST_F(CliTest, SinglePairSweepMatchesRun) {
  const std::vector<std::string> common = {"--problem", "kelly", "--n", "8", "--num-samples", "300",
                                           "--rank", "20", "--memory", "20"};
  auto with = [&](std::vector<std::string> head, const fs::path& out) {
    head.insert(head.end(), common.begin(), common.end());
    head.insert(head.end(), {"--out-dir", out.string()});
    return head;
  };
  fs::create_directories(dir_ / "run");
  fs::create_directories(dir_ / "sweep");
  ASSERT_EQ(run(with({"run"}, dir_ / "run")), kExitOk) << err_.str();
  ASSERT_EQ(run(with({"sweep", "--ranks", "20", "--memories", "20"}, dir_ / "sweep")), kExitOk) << err_.str();
  auto a = nlohmann::json::parse(slurp(dir_ / "run" / "summary.json"));
  auto b = nlohmann::json::parse(slurp(dir_ / "sweep" / "summary_r20_m20.json"));
  a.erase("wall_time_s");
  b.erase("wall_time_s");
  EXPECT_EQ(a, b);
}

TEST_F(CliTest, IterationCapIsFlagged) {
  ASSERT_EQ(run({"sweep", "--problem", "kelly", "--n", "8", "--num-samples", "300", "--ranks", "0",
                 "--memories", "1", "--max-iter", "2", "--eps-gap-abs", "0", "--eps-gap-rel", "0",
                 "--eps-res-abs", "0", "--eps-res-rel", "0", "--out-dir", dir_.string()}),
            kExitOk)
      << err_.str();
  const std::string table = slurp(dir_ / "sweep.csv");
  EXPECT_NE(table.find("0,1,MaxIters,2,false"), std::string::npos) << table;
  EXPECT_NE(out_.str().find('*'), std::string::npos);
}

TEST_F(CliTest, GradcheckPassesForSmoothOracles) {
  EXPECT_EQ(run({"gradcheck", "--problem", "kelly", "--n", "6", "--num-samples", "200", "--points", "5"}),
            kExitOk)
      << err_.str();
  EXPECT_NE(out_.str().find("pass"), std::string::npos);
  EXPECT_EQ(run({"gradcheck", "--problem", "density", "--num-samples", "400", "--data-size", "100", "--points",
                 "5"}),
            kExitOk)
      << err_.str();
}

TEST_F(CliTest, GradcheckMarksCvarNonsmooth) {
  EXPECT_EQ(run({"gradcheck", "--problem", "cvar", "--n", "2", "--num-samples", "200", "--points", "3"}), kExitOk);
  EXPECT_NE(out_.str().find("nonsmooth"), std::string::npos);
}

TEST_F(CliTest, BadSpecExitCode) {
  EXPECT_EQ(run({"run", "--problem", "nope", "--out-dir", dir_.string()}), kExitBadSpec);
  EXPECT_EQ(run({"run", "--problem", "density", "--num-samples", "10", "--out-dir", dir_.string()}), kExitBadSpec);
  EXPECT_NE(run({}), kExitOk);
}

TEST_F(CliTest, InstanceSaveAndLoadGiveSameRun) {
  const fs::path inst = dir_ / "inst.bin";
  fs::create_directories(dir_ / "a");
  fs::create_directories(dir_ / "b");
  ASSERT_EQ(run({"run", "--problem", "newsvendor", "--n", "3", "--num-samples", "300", "--save-instance",
                 inst.string(), "--out-dir", (dir_ / "a").string()}),
            kExitOk)
      << err_.str();
  ASSERT_EQ(run({"run", "--instance", inst.string(), "--out-dir", (dir_ / "b").string()}), kExitOk) << err_.str();
  EXPECT_EQ(column(slurp(dir_ / "a" / "iterations.csv"), "h"), column(slurp(dir_ / "b" / "iterations.csv"), "h"));
}

TEST_F(CliTest, DensityWarnsWhenTheBoxBinds) {
  const fs::path tight = dir_ / "tight.bin";
  save_instance(gen_density(400, 200, 0, 0.0, DensityRegularizer::L2, 0.05), tight);
  ASSERT_EQ(run({"run", "--instance", tight.string(), "--out-dir", dir_.string()}), kExitOk) << err_.str();
  EXPECT_NE(err_.str().find("at the parameter box"), std::string::npos) << err_.str();

  ASSERT_EQ(run({"run", "--problem", "density", "--num-samples", "400", "--data-size", "200", "--out-dir",
                 dir_.string()}),
            kExitOk);
  EXPECT_EQ(err_.str().find("warning"), std::string::npos) << err_.str();
}

TEST_F(CliTest, ConfigFileSuppliesDefaults) {
  const fs::path cfg = dir_ / "run.ini";
  std::ofstream(cfg) << "problem=kelly\nn=7\nnum-samples=200\nmax-iter=3\n";
  ASSERT_EQ(run({"run", "--config", cfg.string(), "--max-iter", "4", "--eps-gap-abs", "0", "--eps-gap-rel", "0",
                 "--eps-res-abs", "0", "--eps-res-rel", "0", "--out-dir", dir_.string()}),
            kExitOk)
      << err_.str();
  const auto summary = nlohmann::json::parse(slurp(dir_ / "summary.json"));
  EXPECT_EQ(summary["iters"].get<int>(), 4);
}

}  // namespace
}  // namespace osmm::cli
