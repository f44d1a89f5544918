// Copyright 2026 The opsample Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "opsample/cli.hpp"
#include "opsample/csv.hpp"
#include "support.hpp"

namespace opsample {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
  json doc() const { return json::parse(code == 0 ? out : err); }
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "opsample");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Outcome o;
  o.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::string slurp(const fs::path& p) { return csv::read_file(p); }

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::scratch_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string generate(const std::string& name, const std::string& task = "classification",
                       const std::string& n = "2000") {
    const auto o = cli({"gen", "--task", task, "--n", n, "--seed", "7", "--out", path(name)});
    EXPECT_EQ(o.code, 0) << o.err;
    return path(name);
  }
  fs::path dir_;
};

TEST_F(Cli, GenCalibratedAndDeterministic) {
  const auto o = cli({"gen", "--task", "classification", "--n", "10000", "--accuracy", "0.9", "--rho", "0.8",
                      "--seed", "7", "--out", path("a.csv")});
  ASSERT_EQ(o.code, 0) << o.err;
  const json m = json::parse(slurp(path("a.manifest.json")));
  EXPECT_EQ(m["rows"], 10000);
  EXPECT_GE(m["realized_xi"].get<double>(), 0.89);
  EXPECT_LE(m["realized_xi"].get<double>(), 0.91);
  ASSERT_EQ(cli({"gen", "--task", "classification", "--n", "10000", "--accuracy", "0.9", "--rho", "0.8",
                 "--seed", "7", "--out", path("b.csv")})
                .code,
            0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
}

TEST_F(Cli, GenRejectsInfeasibleAccuracy) {
  const auto o = cli({"gen", "--accuracy", "1.0", "--out", path("x.csv")});
  EXPECT_NE(o.code, 0);
  EXPECT_TRUE(o.doc().contains("error"));
}

TEST_F(Cli, RunSrsRespectsBudget) {
  const auto pop = generate("pop.csv");
  const auto o = cli({"run", "--population", pop, "--technique", "srs", "--budget", "200", "--seed", "1",
                      "--out", path("r.json")});
  ASSERT_EQ(o.code, 0) << o.err;
  const json j = o.doc();
  EXPECT_TRUE(j.contains("xi_hat"));
  EXPECT_LE(j["distinct_labeled"].get<std::size_t>(), 200u);
  EXPECT_TRUE(fs::exists(path("r.json")));
}

TEST_F(Cli, RunSsrsEchoesAllocation) {
  const auto pop = generate("pop.csv");
  const auto o = cli({"run", "--population", pop, "--technique", "ssrs", "--aux", "confidence", "--k", "10",
                      "--budget", "200", "--out", path("r.json")});
  ASSERT_EQ(o.code, 0) << o.err;
  const json j = o.doc();
  EXPECT_EQ(j["allocation"].size(), 10u);
  EXPECT_EQ(j["allocation_total"], 200);
}

TEST_F(Cli, RunIncompatibleAuxIsError) {
  const auto pop = generate("reg.csv", "regression");
  const auto o = cli({"run", "--population", pop, "--technique", "sups", "--aux", "dsa", "--budget", "20"});
  EXPECT_EQ(o.code, 1);
  EXPECT_EQ(o.doc()["error"]["code"], "incompatible");
}

TEST_F(Cli, RunBudgetAboveSizeIsError) {
  const auto pop = generate("small.csv", "classification", "50");
  const auto o = cli({"run", "--population", pop, "--technique", "rhcs", "--aux", "confidence", "--budget",
                      "60", "--out", path("r.json")});
  EXPECT_EQ(o.code, 1);
}

TEST_F(Cli, UsageErrorExitsTwo) {
  const auto o = cli({"run", "--no-such-flag"});
  EXPECT_EQ(o.code, 2);
  EXPECT_EQ(o.doc()["error"]["code"], "usage");
}

TEST_F(Cli, EvalGridAndReproducibility) {
  const auto pop = generate("pop.csv");
  const auto o = cli({"eval", "--population", pop, "--techniques", "srs,sups", "--aux", "confidence",
                      "--budgets", "50,800", "--reps", "20", "--seed", "3", "--jobs", "2", "--out-dir",
                      path("e1")});
  ASSERT_EQ(o.code, 0) << o.err;
  const std::string summary = slurp(path("e1/summary.csv"));
  EXPECT_NE(summary.find("f_800_50"), std::string::npos);
  std::size_t lines = 0;
  for (char c : summary) lines += c == '\n';
  EXPECT_EQ(lines, 1u + 2u * 2u);

  const auto again = cli({"eval", "--manifest", path("e1/manifest.json"), "--out-dir", path("e2")});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(slurp(path("e2/summary.csv")), summary);
  EXPECT_EQ(slurp(path("e2/raw.csv")), slurp(path("e1/raw.csv")));

  const auto rep = cli({"report", "--raw", path("e1/raw.csv"), "--manifest", path("e1/manifest.json"),
                        "--out-dir", path("r")});
  ASSERT_EQ(rep.code, 0) << rep.err;
  EXPECT_EQ(slurp(path("r/summary.csv")), summary);
  EXPECT_TRUE(fs::exists(path("r/sensitivity.csv")));
}

TEST_F(Cli, EvalDefaultGridRowCount) {
  write(path("cfg.json"),
        R"({"synthetic": {"size": 300}, "synthetic_seed": 1, "reps": 2, "aux": ["confidence"]})");
  const auto o = cli({"eval", "--config", path("cfg.json"), "--techniques", "srs,sups,ssrs", "--out-dir",
                      path("e")});
  ASSERT_EQ(o.code, 0) << o.err;
  const std::string summary = slurp(path("e/summary.csv"));
  std::size_t lines = 0;
  for (char c : summary) lines += c == '\n';
  EXPECT_EQ(lines, 1u + 3u * 5u);
}

TEST_F(Cli, EnvironmentOutputDirectory) {
  const auto pop = generate("pop.csv");
  ::setenv(kOutputDirEnv, path("envout").c_str(), 1);
  const auto o = cli({"run", "--population", pop, "--technique", "srs", "--budget", "10"});
  ::unsetenv(kOutputDirEnv);
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(fs::exists(path("envout/result.json")));
}

TEST_F(Cli, OracleExamples) {
  write(path("tiny.csv"), "id,true_label,predicted_label,score\n0,0,1,2\n1,0,0,1\n2,0,0,1\n");
  auto o = cli({"oracle", "--population", path("tiny.csv"), "--technique", "srs", "--budget", "2"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_LT(o.doc()["gap"].get<double>(), 1e-9);
  EXPECT_NEAR(o.doc()["expectation"].get<double>(), 1.0 / 3.0, 1e-15);

  o = cli({"oracle", "--population", path("tiny.csv"), "--technique", "gbs", "--aux", "score", "--budget",
           "2"});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("not enumerable; use Monte Carlo"), std::string::npos);

  write(path("five.csv"),
        "id,true_label,predicted_label,score\n0,0,1,0.9\n1,0,0,0.1\n2,0,1,0.5\n3,0,0,0.3\n4,0,0,0.7\n");
  o = cli({"oracle", "--population", path("five.csv"), "--technique", "deepest", "--aux", "score",
           "--budget", "3"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_LT(o.doc()["gap"].get<double>(), 1e-9);
}

TEST_F(Cli, ConfigFlagsWinOverFile) {
  const auto pop = generate("pop.csv");
  write(path("run.json"), json{{"population", pop}, {"technique", "srs"}, {"budget", 30}}.dump());
  const auto o = cli({"run", "--config", path("run.json"), "--budget", "40", "--out", path("r.json")});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.doc()["budget"], 40);
}

}  // namespace
}  // namespace opsample
