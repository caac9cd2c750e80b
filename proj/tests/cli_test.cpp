// Copyright 2026 The logrank Authors
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

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <string>

#include "fixtures.hpp"
#include "gtest/gtest.h"
#include "logrank/logrank.hpp"

namespace logrank {
namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run_cli(const std::string& args, const std::filesystem::path& dir) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + LOGRANK_CLI + "\" " + args + " >\"" + out.string() +
                          "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testing::read_file(out);
  r.err = testing::read_file(err);
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::scratch_dir(std::string("cli-") +
                                ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fixture_.write(dir_ / "cohort.csv");
  }

  std::string analysis_args(const std::string& out) const {
    return "--input \"" + (dir_ / "cohort.csv").string() + "\" --out \"" + (dir_ / out).string() +
           "\" --entity customer --categories browser,country,ctype --p 2 --k 5";
  }

  std::filesystem::path dir_;
  testing::CustomerCohortFixture fixture_;
};

TEST_F(CliTest, RecommendMatchesOracle) {
  const auto r = run_cli("recommend " + analysis_args("out") + " --format csv", dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("e2e_ttd="), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "out" / "baseline.json"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "out" / "reports.csv"));
  const auto oracle = oracle_recommend(dir_ / "cohort.csv", fixture_.spec(), FieldMapping{});
  const ReportContext context{{"browser", "country", "ctype"}, "customer", 5, 1};
  EXPECT_EQ(testing::read_file(dir_ / "out" / "reports.json"),
            emit_report(oracle, ReportFormat::kJson, context));
}

TEST_F(CliTest, DiscoverWritesOnlyBaseline) {
  const auto r = run_cli("discover " + analysis_args("out"), dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = Json::parse(testing::read_file(dir_ / "out" / "baseline.json"));
  EXPECT_EQ(doc["combinations"].size(), 8u);
  EXPECT_FALSE(std::filesystem::exists(dir_ / "out" / "reports.json"));
}

TEST_F(CliTest, ThreadCountDoesNotChangeBytes) {
  ASSERT_EQ(run_cli("recommend " + analysis_args("t1") + " --threads 1", dir_).code, 0);
  ASSERT_EQ(run_cli("recommend " + analysis_args("t4") + " --threads 4", dir_).code, 0);
  for (const char* f : {"baseline.json", "reports.json"}) {
    EXPECT_EQ(testing::read_file(dir_ / "t1" / f), testing::read_file(dir_ / "t4" / f)) << f;
  }
}

TEST_F(CliTest, ConfigFileSuppliesSettings) {
  {
    std::ofstream conf(dir_ / "run.conf");
    conf << "# analysis\nentity = customer\ncategories = browser, country, ctype\np = 2\nk = 1\n";
  }
  const auto r = run_cli("recommend --config \"" + (dir_ / "run.conf").string() + "\" --input \"" +
                             (dir_ / "cohort.csv").string() + "\" --out \"" + (dir_ / "out").string() + "\"",
                         dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto reports = parse_reports(testing::read_file(dir_ / "out" / "reports.json"));
  for (const auto& rep : reports) EXPECT_LE(rep.items.size(), 1u);
}

TEST_F(CliTest, MissingInputNamesThePath) {
  const auto missing = (dir_ / "nope.log").string();
  const auto r = run_cli("recommend --input \"" + missing + "\" --out \"" + (dir_ / "out").string() +
                             "\" --entity customer --categories browser",
                         dir_);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(missing), std::string::npos) << r.err;
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run_cli("", dir_).code, 1);
  EXPECT_EQ(run_cli("frobnicate", dir_).code, 1);
  EXPECT_EQ(run_cli("recommend " + analysis_args("out") + " --format xml", dir_).code, 1);
  EXPECT_EQ(run_cli("recommend " + analysis_args("out") + " --k 0", dir_).code, 1);
  EXPECT_EQ(run_cli("recommend " + analysis_args("out") + " --categories nosuch", dir_).code, 1);
  EXPECT_EQ(run_cli("--help", dir_).code, 0);
}

TEST_F(CliTest, EmptyLogIsAnInputError) {
  {
    std::ofstream log(dir_ / "empty.csv");
    log << "customer,browser\n";
  }
  const auto r = run_cli("recommend --input \"" + (dir_ / "empty.csv").string() + "\" --out \"" +
                             (dir_ / "out").string() + "\" --entity customer --categories browser",
                         dir_);
  EXPECT_EQ(r.code, 2) << r.err;
}

TEST_F(CliTest, ExplainWritesCharts) {
  const auto r = run_cli("explain WN " + analysis_args("out"), dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = Json::parse(testing::read_file(dir_ / "out" / "WN" / "explanation.json"));
  EXPECT_EQ(doc["anomaly_charts"].size(), 2u);
  for (const auto& c : doc["anomaly_charts"]) {
    EXPECT_TRUE(std::filesystem::exists(dir_ / "out" / "WN" / c["file"].get<std::string>()));
  }
  EXPECT_EQ(run_cli("explain nobody " + analysis_args("out2"), dir_).code, 2);
}

TEST_F(CliTest, SynthThenRecommend) {
  {
    std::ofstream conf(dir_ / "synth.conf");
    conf << "seed = 9\nentries = 5000\nentities = 64\ncategories = c1:4, c2:6\n"
            "plant = E050|c1v01|c2v03|50\n";
  }
  auto r = run_cli("synth --config \"" + (dir_ / "synth.conf").string() + "\" --out \"" +
                       (dir_ / "syn").string() + "\"",
                   dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto manifest = Json::parse(testing::read_file(dir_ / "syn" / "manifest.json"));
  EXPECT_EQ(manifest["plants"][0]["entity"], "E050");
  r = run_cli("recommend --input \"" + (dir_ / "syn" / "synth.log").string() + "\" --out \"" +
                  (dir_ / "rec").string() + "\" --entity entity --categories c1,c2",
              dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto reports = parse_reports(testing::read_file(dir_ / "rec" / "reports.json"));
  for (const auto& rep : reports) {
    if (rep.entity != "E050") continue;
    ASSERT_FALSE(rep.items.empty());
    EXPECT_EQ(rep.items[0].combination, (Combination{"c1v01", "c2v03"}));
  }
}

TEST_F(CliTest, BenchSmoke) {
  const auto r = run_cli("bench --sizes 2000 --threads 1,2 --out \"" + (dir_ / "bench").string() + "\"",
                         dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = testing::read_file(dir_ / "bench" / "bench.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_EQ(csv.substr(0, 12), "size,threads");
}

}  // namespace
}  // namespace logrank
