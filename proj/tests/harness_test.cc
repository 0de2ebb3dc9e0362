/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an
 * "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, either express or implied.  See the License for the
 * specific language governing permissions and limitations
 * under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <unistd.h>

#include "hatune/harness.h"
#include "hatune/suite.h"
#include "json.hpp"

namespace hatune {
namespace {

namespace fs = std::filesystem;

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hatune_harness_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> Snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = Slurp(e.path());
  }
  return files;
}

ExperimentPlan SmallPlan(const std::string& out) {
  const SuiteManifest suite = LoadSuite(DefaultSuitePath());
  ExperimentPlan plan;
  plan.workloads = {suite.Find("48")};
  TunerConfig base;
  base.total_trials = 200;
  TunerConfig enhanced = base;
  enhanced.mode = TunerMode::kEnhanced;
  plan.modes = {base, enhanced};
  plan.repeats = 3;
  plan.base_seed = 500;
  plan.output_dir = out;
  plan.workers = 3;
  return plan;
}

/*! \brief Linear-interpolation quantile on a sorted sample. */
double Type7(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = (v.size() - 1) * q;
  const size_t lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

TEST(WorkerCount, ReadsEnvironment) {
  ::setenv("HATUNE_WORKERS", "3", 1);
  EXPECT_EQ(WorkerCount(), 3);
  for (const char* bad : {"0", "-2", "two", "4x", ""}) {
    ::setenv("HATUNE_WORKERS", bad, 1);
    EXPECT_THROW(WorkerCount(), std::invalid_argument) << bad;
  }
  ::unsetenv("HATUNE_WORKERS");
  EXPECT_GE(WorkerCount(), 1);
}

TEST(Plan, EnumerationAndSeeds) {
  const SuiteManifest suite = LoadSuite(DefaultSuitePath());
  ExperimentPlan plan = SmallPlan("");
  plan.workloads.push_back(suite.Find("3"));
  const auto keys = EnumerateRuns(plan);
  ASSERT_EQ(keys.size(), 12u);
  std::set<uint64_t> seeds;
  for (size_t i = 0; i < keys.size(); ++i) {
    EXPECT_EQ(keys[i].seed, plan.base_seed + i);
    seeds.insert(keys[i].seed);
  }
  EXPECT_EQ(seeds.size(), keys.size());
  EXPECT_EQ(keys[0].workload_id, "48");
  EXPECT_EQ(keys[3].mode, TunerMode::kEnhanced);
  EXPECT_EQ(keys[6].workload_id, "3");
  EXPECT_EQ(keys[5].repeat, 2);
}

TEST(Plan, Validation) {
  ExperimentPlan plan = SmallPlan("");
  EXPECT_NO_THROW(plan.Validate());
  plan.repeats = 0;
  EXPECT_THROW(plan.Validate(), std::invalid_argument);
  plan = SmallPlan("");
  plan.modes.push_back(plan.modes[0]);
  EXPECT_THROW(plan.Validate(), std::invalid_argument);
  plan = SmallPlan("");
  plan.workloads.push_back(plan.workloads[0]);
  EXPECT_THROW(plan.Validate(), std::invalid_argument);
  plan = SmallPlan("");
  plan.modes.clear();
  EXPECT_THROW(plan.Validate(), std::invalid_argument);
}

class OnDisk : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(FreshDir("plan"));
    report_ = new ExperimentReport(RunPlan(SmallPlan(dir_->string())));
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete report_;
    delete dir_;
  }
  static fs::path* dir_;
  static ExperimentReport* report_;
};
fs::path* OnDisk::dir_ = nullptr;
ExperimentReport* OnDisk::report_ = nullptr;

TEST_F(OnDisk, WritesOneRecordAndLogPerRun) {
  int records = 0, logs = 0;
  for (const auto& e : fs::directory_iterator(*dir_ / "runs")) {
    if (e.path().extension() == ".json") ++records;
    if (e.path().extension() == ".jsonl") ++logs;
  }
  EXPECT_EQ(records, 6);
  EXPECT_EQ(logs, 6);
  EXPECT_TRUE(fs::exists(*dir_ / "truth" / "48.json"));
  EXPECT_EQ(report_->runs.size(), 6u);
  EXPECT_EQ(report_->cells.size(), 2u);
}

TEST_F(OnDisk, RerunIsByteStableAndMatchesLoad) {
  const auto before = Snapshot(*dir_);
  const ExperimentReport again = RunPlan(SmallPlan(dir_->string()));
  EXPECT_EQ(Snapshot(*dir_), before);
  const ExperimentReport loaded = LoadReport(dir_->string(), {"48"});
  for (const ExperimentReport* r : {&again, &loaded}) {
    ASSERT_EQ(r->runs.size(), report_->runs.size());
    for (size_t i = 0; i < r->runs.size(); ++i) {
      EXPECT_EQ(RunResultToJson(r->runs[i]), RunResultToJson(report_->runs[i]));
    }
    for (TunerMode m : {TunerMode::kBaseline, TunerMode::kEnhanced}) {
      EXPECT_EQ(r->Cell("48", m).trials_to_best.median, report_->Cell("48", m).trials_to_best.median);
    }
  }
}

TEST_F(OnDisk, FreshDirectoryReproducesLogs) {
  const fs::path other = FreshDir("again");
  RunPlan(SmallPlan(other.string()));
  auto a = Snapshot(*dir_ / "runs");
  auto b = Snapshot(other / "runs");
  fs::remove_all(other);
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [name, text] : a) {
    if (name.ends_with(".jsonl")) EXPECT_EQ(text, b.at(name)) << name;
  }
}

TEST_F(OnDisk, AggregatesMatchRawLogs) {
  const SearchSpace space = GenerateSpace(LoadSuite(DefaultSuitePath()).Find("48").workload);
  const GroundTruthTable truth = LoadGroundTruth((*dir_ / "truth" / "48.json").string(), space);
  std::map<TunerMode, std::vector<double>> samples;
  for (const auto& e : fs::directory_iterator(*dir_ / "runs")) {
    if (e.path().extension() != ".jsonl") continue;
    std::ifstream in(e.path());
    std::string line;
    int64_t t2b = 0, n = 0;
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line);
      ++n;
      if (t2b == 0 && j.at("gflops").get<double>() == truth.best_gflops()) t2b = n;
    }
    if (t2b == 0) t2b = n + 1;
    const std::string name = e.path().filename().string();
    samples[name.find("-enhanced-") != std::string::npos ? TunerMode::kEnhanced : TunerMode::kBaseline].push_back(
        static_cast<double>(t2b));
  }
  for (auto& [mode, v] : samples) {
    ASSERT_EQ(v.size(), 3u);
    const AggregateStatistics& a = report_->Cell("48", mode).trials_to_best;
    EXPECT_DOUBLE_EQ(a.median, Type7(v, 0.5));
    EXPECT_DOUBLE_EQ(a.q1, Type7(v, 0.25));
    EXPECT_DOUBLE_EQ(a.q3, Type7(v, 0.75));
    EXPECT_EQ(a.count, 3);
  }
}

TEST_F(OnDisk, PhasesAccountForTotal) {
  for (const RunResult& r : report_->runs) {
    EXPECT_LE(r.timings.PhaseSum(), r.timings.total * 1.0001);
    EXPECT_GE(r.timings.PhaseSum(), r.timings.total * 0.9);
    if (r.key.mode == TunerMode::kEnhanced) {
      EXPECT_GT(r.timings.presample, 0);
      EXPECT_EQ(r.presample_size, 1000);
      EXPECT_EQ(r.known_invalid_measured, 25);
      EXPECT_EQ(r.known_invalid_selected, 0);
    } else {
      EXPECT_EQ(r.timings.presample, 0);
      EXPECT_TRUE(std::isnan(r.presample_valid_fraction));
    }
  }
}

TEST(Harness, InMemoryMatchesOnDisk) {
  const fs::path dir = FreshDir("mem");
  const ExperimentReport disk = RunPlan(SmallPlan(dir.string()));
  fs::remove_all(dir);
  const ExperimentReport mem = RunPlan(SmallPlan(""));
  ASSERT_EQ(disk.runs.size(), mem.runs.size());
  for (size_t i = 0; i < mem.runs.size(); ++i) {
    EXPECT_EQ(mem.runs[i].stats.convergence_curve, disk.runs[i].stats.convergence_curve);
    EXPECT_EQ(mem.runs[i].stats.trials_to_best, disk.runs[i].stats.trials_to_best);
  }
}

TEST(Harness, WorkerCountDoesNotChangeResults) {
  ExperimentPlan one = SmallPlan("");
  one.workers = 1;
  const ExperimentReport a = RunPlan(one);
  const ExperimentReport b = RunPlan(SmallPlan(""));
  for (size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].stats.convergence_curve, b.runs[i].stats.convergence_curve);
  }
}

TEST(RunRecord, JsonRoundTrip) {
  RunResult r;
  r.key = {"17", TunerMode::kEnhanced, 4, 99};
  r.stats.trials_to_best = 3;
  r.stats.convergence_curve = {{1, 0.5}, {2, 0.5}, {3, 1.25}};
  r.timings = {0.1, 0.2, 0.3, 0.4, 1.1};
  r.total_trials = 3;
  r.valid_measured = 2;
  r.known_invalid_measured = 1;
  r.known_invalid_selected = 1;
  r.presample_valid_fraction = 0.375;
  r.presample_size = 8;
  const std::string text = RunResultToJson(r);
  EXPECT_EQ(RunResultToJson(RunResultFromJson(text)), text);
  EXPECT_THROW(RunResultFromJson("{\"format\":\"other\"}"), std::exception);
}

RunResult Fake(const std::string& id, TunerMode mode, int repeat, int64_t t2b) {
  RunResult r;
  r.key = {id, mode, repeat, 0};
  r.stats.trials_to_best = t2b;
  return r;
}

TEST(Compare, RatiosAndZeroIqr) {
  std::vector<RunResult> runs;
  // Workload a: baseline {10,20,30}, enhanced {5,5,5}.
  for (int i = 0; i < 3; ++i) runs.push_back(Fake("a", TunerMode::kBaseline, i, 10 * (i + 1)));
  for (int i = 0; i < 3; ++i) runs.push_back(Fake("a", TunerMode::kEnhanced, i, 5));
  // Workload b: both degenerate.
  for (int i = 0; i < 3; ++i) runs.push_back(Fake("b", TunerMode::kBaseline, i, 8));
  for (int i = 0; i < 3; ++i) runs.push_back(Fake("b", TunerMode::kEnhanced, i, 16));
  // Workload c: baseline degenerate, enhanced spread.
  for (int i = 0; i < 3; ++i) runs.push_back(Fake("c", TunerMode::kBaseline, i, 8));
  for (int i = 0; i < 3; ++i) runs.push_back(Fake("c", TunerMode::kEnhanced, i, 4 * (i + 1)));
  const ExperimentReport rep =
      AssembleReport({"a", "b", "c"}, {TunerMode::kBaseline, TunerMode::kEnhanced}, std::move(runs));
  const ComparisonSummary s = CompareModes(rep);
  ASSERT_EQ(s.workloads.size(), 3u);
  EXPECT_DOUBLE_EQ(s.workloads[0].median_ratio, 0.25);
  EXPECT_DOUBLE_EQ(s.workloads[0].iqr_ratio, 0.0);
  EXPECT_TRUE(s.workloads[0].enhanced_wins);
  EXPECT_DOUBLE_EQ(s.workloads[1].median_ratio, 2.0);
  EXPECT_DOUBLE_EQ(s.workloads[1].iqr_ratio, 1.0);
  EXPECT_FALSE(s.workloads[1].enhanced_wins);
  EXPECT_DOUBLE_EQ(s.workloads[2].median_ratio, 1.0);
  EXPECT_TRUE(std::isinf(s.workloads[2].iqr_ratio));
  EXPECT_EQ(s.wins, 2);
  EXPECT_DOUBLE_EQ(s.mean_median_ratio, 3.25 / 3);
}

TEST(Assemble, RejectsIncompleteInput) {
  EXPECT_THROW(AssembleReport({"a"}, {TunerMode::kBaseline}, {}), std::invalid_argument);
  EXPECT_THROW(AssembleReport({"a"}, {TunerMode::kBaseline, TunerMode::kEnhanced},
                              {Fake("a", TunerMode::kBaseline, 0, 1)}),
               std::invalid_argument);
  EXPECT_THROW(AssembleReport({"a"}, {TunerMode::kBaseline}, {Fake("z", TunerMode::kBaseline, 0, 1)}),
               std::invalid_argument);
}

}  // namespace
}  // namespace hatune
