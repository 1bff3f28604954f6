// Copyright 2026 The qst-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qst/cli.hpp"

namespace qst {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qst-lab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

fs::path output_dir(const Run& r) {
  auto line = r.out;
  while (!line.empty() && line.back() == '\n') line.pop_back();
  return line;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("qst_cli_test_" + std::string(
        ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }
  std::string root() const { return root_.string(); }
  fs::path root_;
};

TEST_F(CliTest, NoSubcommandPrintsUsage) {
  const auto r = cli({});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST_F(CliTest, HelpExitsZeroEverywhere) {
  EXPECT_EQ(cli({"--help"}).code, 0);
  for (const char* sub : {"variance", "converge", "tradeoff", "compare-constraint", "compare-basis", "init-quality"}) {
    const auto r = cli({sub, "--help"});
    EXPECT_EQ(r.code, 0) << sub;
    for (const char* flag : {"--config", "--n", "--r", "--M", "--trials", "--seed", "--out"}) {
      EXPECT_NE(r.out.find(flag), std::string::npos) << sub << " " << flag;
    }
  }
  EXPECT_NE(cli({"tradeoff", "--help"}).out.find("--N"), std::string::npos);
  EXPECT_NE(cli({"converge", "--help"}).out.find("--K"), std::string::npos);
  EXPECT_NE(cli({"converge", "--help"}).out.find("--mu"), std::string::npos);
  EXPECT_EQ(cli({"h-curve", "--help"}).code, 0);
  const auto p = cli({"plot", "--help"});
  EXPECT_EQ(p.code, 0);
  EXPECT_NE(p.out.find("--data"), std::string::npos);
}

TEST_F(CliTest, HCurveTabulatesHundredPoints) {
  const auto r = cli({"h-curve", "--out", root()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto dir = output_dir(r);
  EXPECT_EQ(dir.filename().string().rfind("h-curve-", 0), 0u);
  std::ifstream f(dir / "results.csv");
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line, "delta,h");
  std::vector<std::pair<double, double>> rows;
  while (std::getline(f, line)) {
    const auto c = line.find(',');
    rows.emplace_back(std::stod(line.substr(0, c)), std::stod(line.substr(c + 1)));
  }
  ASSERT_EQ(rows.size(), 100u);
  EXPECT_EQ(rows.front().first, 0.0);
  EXPECT_NEAR(rows.front().second, 7.0005, 1e-3);
  EXPECT_NEAR(rows.back().first, 0.09, 1e-15);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GT(rows[i].second, rows[i - 1].second);
  EXPECT_TRUE(fs::exists(dir / "plot.svg"));
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
}

TEST_F(CliTest, ConfigErrorsExitTwoWithOneLine) {
  const auto r = cli({"tradeoff", "--n", "2", "--N", "64", "--M", "1,3", "--out", root()});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  EXPECT_NE(r.err.find("not divisible"), std::string::npos);
  EXPECT_TRUE(fs::is_empty(root_));

  const auto bad_number = cli({"converge", "--n", "4,x", "--out", root()});
  EXPECT_EQ(bad_number.code, 2);
  EXPECT_EQ(std::count(bad_number.err.begin(), bad_number.err.end(), '\n'), 1);

  const auto missing = cli({"converge", "--config", (root_ / "missing.json").string()});
  EXPECT_EQ(missing.code, 2);
  EXPECT_EQ(std::count(missing.err.begin(), missing.err.end(), '\n'), 1);
}

TEST_F(CliTest, UnknownAndInapplicableFlagsRejected) {
  EXPECT_EQ(cli({"converge", "--bogus", "1"}).code, 2);
  EXPECT_EQ(cli({"tradeoff", "--K", "5"}).code, 2);
  EXPECT_EQ(cli({"converge", "--N", "5"}).code, 2);
  EXPECT_EQ(cli({"variance", "--mu", "0.1"}).code, 2);
}

TEST_F(CliTest, PlotRequiresData) {
  const auto r = cli({"plot", "--out", (root_ / "x.svg").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--data"), std::string::npos);
}

TEST_F(CliTest, TradeoffIsDeterministicForSeed) {
  const std::vector<std::string> args{"tradeoff", "--n", "3", "--r", "1", "--N", "1024", "--M", "1,4,16",
                                      "--trials", "2", "--seed", "7", "--out", root()};
  const auto a = cli(args);
  const auto b = cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  const auto da = output_dir(a), db = output_dir(b);
  EXPECT_NE(da, db);
  for (const char* f : {"results.csv", "summary.csv", "plot.svg", "plot-data.csv"}) {
    EXPECT_EQ(slurp(da / f), slurp(db / f)) << f;
  }
  const auto c = cli({"tradeoff", "--n", "3", "--r", "1", "--N", "1024", "--M", "1,4,16", "--trials", "2", "--seed",
                      "8", "--out", root()});
  EXPECT_NE(slurp(output_dir(c) / "results.csv"), slurp(da / "results.csv"));
}

TEST_F(CliTest, ConfigFileWithFlagOverrides) {
  const auto cfg = root_ / "conv.json";
  std::ofstream(cfg) << R"({"kind": "convergence", "qubits": [2, 3], "rank": 1, "settings": 100,
                           "shots": 20, "step-size": 0.3, "trials": 3, "seed": 5})";
  const auto r = cli({"converge", "--config", cfg.string(), "--trials", "2", "--out", root()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto dir = output_dir(r);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest.at("config").at("trials"), 2);
  EXPECT_EQ(manifest.at("config").at("seed"), 5);
  EXPECT_EQ(manifest.at("config").at("qubits"), nlohmann::json::array({2, 3}));
  // One trace per (configuration, trial).
  std::size_t traces = 0;
  for (const auto& e : fs::directory_iterator(dir / "traces")) traces += e.path().extension() == ".csv";
  EXPECT_EQ(traces, 4u);
  EXPECT_TRUE(fs::exists(dir / "traces" / "config1-plain-trial1.csv"));

  const auto mismatch = cli({"tradeoff", "--config", cfg.string()});
  EXPECT_EQ(mismatch.code, 2);
  EXPECT_NE(mismatch.err.find("does not match"), std::string::npos);
}

TEST_F(CliTest, PlotSubcommandRendersStudyData) {
  const auto run = cli({"init-quality", "--n", "2", "--K", "10,100", "--trials", "2", "--out", root()});
  ASSERT_EQ(run.code, 0) << run.err;
  const auto svg = root_ / "replot" / "p.svg";
  const auto r = cli({"plot", "--data", (output_dir(run) / "plot-data.csv").string(), "--out", svg.string(),
                      "--log-x", "--log-y", "--title", "again"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto text = slurp(svg);
  EXPECT_EQ(text.rfind("<svg", 0), 0u);
  EXPECT_NE(text.find("again"), std::string::npos);
  EXPECT_NE(text.find("<polyline"), std::string::npos);
}

TEST_F(CliTest, BinaryExitCodes) {
  const std::string bin = QST_LAB_BINARY;
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status(bin + " --help"), 0);
  EXPECT_EQ(status(bin), 2);
  EXPECT_EQ(status(bin + " h-curve --out " + root()), 0);
  EXPECT_EQ(status(bin + " tradeoff --N 10 --M 3 --out " + root()), 2);
}

}  // namespace
}  // namespace qst
