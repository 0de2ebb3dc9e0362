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

/*!
 * \file hatune_main.cc
 * \brief Command line front end.
 */
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hatune/harness.h"
#include "hatune/oracle.h"
#include "hatune/report.h"
#include "hatune/sampler.h"
#include "hatune/study.h"
#include "hatune/suite.h"
#include "hatune/tuner.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace hatune;

namespace {

struct Options {
  std::string suite_path = DefaultSuitePath();
  std::vector<std::string> workloads;
  std::vector<std::string> modes;
  int trials = 750;
  int epoch_size = 50;
  int repeats = 0;
  uint64_t seed = 0;
  std::string out;
  std::vector<std::string> formats;
  std::string truth_dir;
  int64_t presample_budget = 1000;
  int presample_parallel = 8;
};

void WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<SuiteEntry> SelectWorkloads(const SuiteManifest& suite, const std::vector<std::string>& ids) {
  std::vector<SuiteEntry> out;
  if (ids.empty() || (ids.size() == 1 && ids[0] == "all")) return suite.workloads;
  for (const std::string& id : ids) out.push_back(suite.Find(id));
  return out;
}

const SuiteEntry& SingleWorkload(const SuiteManifest& suite, const std::vector<std::string>& ids) {
  if (ids.size() != 1 || ids[0] == "all") throw CLI::ValidationError("--workload", "exactly one workload id required");
  return suite.Find(ids[0]);
}

TunerConfig MakeConfig(const Options& o, TunerMode mode) {
  TunerConfig cfg;
  cfg.total_trials = o.trials;
  cfg.epoch_size = o.epoch_size;
  cfg.mode = mode;
  cfg.seed = o.seed;
  cfg.Validate();
  return cfg;
}

int GenSpace(const Options& o) {
  const SuiteManifest suite = LoadSuite(o.suite_path);
  nlohmann::ordered_json all = nlohmann::ordered_json::array();
  for (const SuiteEntry& e : SelectWorkloads(suite, o.workloads)) {
    const SearchSpace space = GenerateSpace(e.workload);
    nlohmann::ordered_json knobs = nlohmann::ordered_json::array();
    for (const Knob& k : space.knobs()) {
      knobs.push_back({{"name", k.name}, {"kind", KnobKindName(k.kind)}, {"values", k.values}});
    }
    char hash[17];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(space.Hash()));
    all.push_back({{"workload_id", e.workload.id}, {"size", space.size()}, {"space_hash", hash}, {"knobs", knobs}});
  }
  WriteText(o.out, all.dump(2) + "\n");
  return 0;
}

int RecordTruth(const Options& o) {
  const SuiteManifest suite = LoadSuite(o.suite_path);
  const std::string dir = o.out.empty() ? "truth" : o.out;
  fs::create_directories(dir);
  int outside = 0;
  for (const SuiteEntry& e : SelectWorkloads(suite, o.workloads)) {
    const GroundTruthTable table = RecordGroundTruth(e.workload, e.budget);
    SaveGroundTruth(table, (fs::path(dir) / (e.workload.id + ".json")).string());
    const bool inside = table.valid_ratio() >= e.ratio_low && table.valid_ratio() <= e.ratio_high;
    outside += inside ? 0 : 1;
    std::printf("%-4s size %6lld valid_ratio %.4f band [%.4f, %.4f]%s\n", e.workload.id.c_str(),
                static_cast<long long>(table.size()), table.valid_ratio(), e.ratio_low, e.ratio_high,
                inside ? "" : " OUTSIDE BAND");
  }
  return outside == 0 ? 0 : 1;
}

int RunPresample(const Options& o) {
  const SuiteManifest suite = LoadSuite(o.suite_path);
  const SuiteEntry& e = SingleWorkload(suite, o.workloads);
  const SearchSpace space = GenerateSpace(e.workload);
  const GroundTruthTable truth = LoadOrRecordTruth(e, space, o.truth_dir);
  const PresampleSet set = Presample(std::min<int64_t>(o.presample_budget, space.size()), o.presample_parallel, space,
                                     [&truth](int64_t i) { return truth.at(i).valid; }, o.seed);
  WriteText(o.out.empty() ? e.workload.id + "-presample.json" : o.out, PresampleToJson(set, e.workload.id));
  std::fprintf(stderr, "%s: %zu evaluated, %zu valid (%.4f; space ratio %.4f)%s\n", e.workload.id.c_str(),
               set.entries.size(), set.valid_subset.size(),
               static_cast<double>(set.valid_subset.size()) / static_cast<double>(set.entries.size()),
               truth.valid_ratio(), set.exhausted ? ", space exhausted" : "");
  return 0;
}

int Tune(const Options& o) {
  const SuiteManifest suite = LoadSuite(o.suite_path);
  const SuiteEntry& e = SingleWorkload(suite, o.workloads);
  if (o.modes.size() != 1) throw CLI::ValidationError("--mode", "exactly one mode required");
  ExperimentPlan plan;
  plan.workloads = {e};
  plan.modes = {MakeConfig(o, ParseTunerMode(o.modes[0]))};
  plan.presample_budget = o.presample_budget;
  plan.presample_parallel = o.presample_parallel;
  plan.Validate();
  const SearchSpace space = GenerateSpace(e.workload);
  const GroundTruthTable truth = LoadOrRecordTruth(e, space, o.truth_dir);
  const RunKey key{e.workload.id, plan.modes[0].mode, 0, o.seed};
  RunResult result;
  const TuningRun run = ExecuteRun(key, plan, space, truth, &result);
  WriteText(o.out, RunLogToJsonLines(run.log));
  std::fprintf(stderr, "%s %s seed %llu: trials_to_best %lld (of %d), best %.4f / %.4f GFLOP/s, %.3f s\n",
               e.workload.id.c_str(), TunerModeName(key.mode), static_cast<unsigned long long>(o.seed),
               static_cast<long long>(run.stats.trials_to_best), o.trials,
               run.log.empty() ? 0.0 : run.log.back().best_so_far, truth.best_gflops(), run.timings.total);
  return 0;
}

int Study(const Options& o) {
  const SuiteManifest suite = LoadSuite(o.suite_path);
  StudyOptions opt;
  opt.seed = o.seed;
  if (o.repeats > 0) opt.repeats = o.repeats;
  std::map<std::string, StudyReport> studies;
  std::vector<StudyReport> pooled;
  for (const SuiteEntry& e : SelectWorkloads(suite, o.workloads)) {
    const SearchSpace space = GenerateSpace(e.workload);
    const GroundTruthTable truth = LoadOrRecordTruth(e, space, o.truth_dir);
    try {
      studies[e.workload.id] = ControlledRatioStudy(space, truth, opt);
      pooled.push_back(studies[e.workload.id]);
    } catch (const std::invalid_argument& err) {
      std::fprintf(stderr, "skipping %s: %s\n", e.workload.id.c_str(), err.what());
    }
  }
  if (pooled.empty()) throw std::runtime_error("no workload could host the study");
  if (pooled.size() > 1) studies["pooled"] = PoolStudies(pooled);
  const std::string format = o.formats.empty() ? "csv" : o.formats[0];
  if (format == "csv") {
    WriteText(o.out, StudyGridCsv(studies));
  } else if (format == "json") {
    nlohmann::ordered_json j;
    for (const auto& [id, s] : studies) {
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (const StudyCell& c : s.cells) {
        rows.push_back({{"ratio", c.ratio},
                        {"sample_size", c.sample_size},
                        {"ndcg", c.ndcg},
                        {"precision", c.precision},
                        {"accuracy_valid_invalid", c.accuracy_valid_invalid},
                        {"accuracy_valid_valid", c.accuracy_valid_valid}});
      }
      j[id] = rows;
    }
    WriteText(o.out, j.dump(2) + "\n");
  }
  return 0;
}

std::vector<ReportFormat> Formats(const Options& o) {
  std::vector<ReportFormat> out;
  if (o.formats.empty()) return {ReportFormat::kCsv, ReportFormat::kJson, ReportFormat::kSvg};
  for (const std::string& f : o.formats) out.push_back(ParseReportFormat(f));
  return out;
}

void Emit(const ExperimentReport& report, const Options& o, const std::string& dir) {
  for (ReportFormat f : Formats(o)) {
    for (const std::string& path : EmitReport(report, f, dir)) std::fprintf(stderr, "wrote %s\n", path.c_str());
  }
  const bool both = report.modes.size() == 2;
  if (both) {
    const ComparisonSummary s = CompareModes(report);
    std::printf("mean median ratio %.3f, mean IQR ratio %.3f, enhanced wins %d/%zu\n", s.mean_median_ratio,
                s.mean_iqr_ratio, s.wins, s.workloads.size());
  }
}

int Plan(const Options& o) {
  const SuiteManifest suite = LoadSuite(o.suite_path);
  ExperimentPlan plan;
  plan.workloads = SelectWorkloads(suite, o.workloads);
  const std::vector<std::string> modes = o.modes.empty() ? std::vector<std::string>{"baseline", "enhanced"} : o.modes;
  for (const std::string& m : modes) plan.modes.push_back(MakeConfig(o, ParseTunerMode(m)));
  plan.repeats = o.repeats > 0 ? o.repeats : 20;
  plan.base_seed = o.seed;
  plan.output_dir = o.out.empty() ? "experiment" : o.out;
  plan.presample_budget = o.presample_budget;
  plan.presample_parallel = o.presample_parallel;
  const ExperimentReport report = RunPlan(plan);
  Emit(report, o, (fs::path(plan.output_dir) / "report").string());
  return 0;
}

int Report(const Options& o) {
  const SuiteManifest suite = LoadSuite(o.suite_path);
  std::vector<std::string> ids;
  for (const SuiteEntry& e : SelectWorkloads(suite, o.workloads)) ids.push_back(e.workload.id);
  const std::string dir = o.out.empty() ? "experiment" : o.out;
  const ExperimentReport report = LoadReport(dir, ids);
  Emit(report, o, (fs::path(dir) / "report").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hardware-aware initialization for model-guided auto-tuning on a synthetic accelerator"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--suite", o.suite_path, "workload suite manifest")->capture_default_str();

  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--workload", o.workloads, "workload id(s), or 'all'");
    sub->add_option("--seed", o.seed, "random seed (base seed for plans)");
    sub->add_option("--out", o.out, "output file or directory");
    sub->add_option("--truth-dir", o.truth_dir, "directory of recorded ground-truth tables");
  };
  auto add_tuning = [&o](CLI::App* sub) {
    sub->add_option("--trials", o.trials, "measurements per run")->check(CLI::PositiveNumber);
    sub->add_option("--epoch-size", o.epoch_size, "measurements per epoch")->check(CLI::PositiveNumber);
    sub->add_option("--presample-budget", o.presample_budget, "presample size cap")->check(CLI::PositiveNumber);
    sub->add_option("--presample-parallel", o.presample_parallel, "presample batch width")
        ->check(CLI::PositiveNumber);
  };
  const std::vector<std::string> mode_names = {"baseline", "enhanced"};
  const std::vector<std::string> format_names = {"csv", "json", "svg"};

  CLI::App* gen = app.add_subcommand("gen-space", "print the knob grid of workloads");
  add_common(gen);
  CLI::App* truth = app.add_subcommand("record-truth", "measure every configuration and save the tables");
  add_common(truth);
  CLI::App* pre = app.add_subcommand("presample", "validity presampling of one workload");
  add_common(pre);
  add_tuning(pre);
  CLI::App* tune = app.add_subcommand("tune", "one tuning run, trial log as JSON lines");
  add_common(tune);
  add_tuning(tune);
  tune->add_option("--mode", o.modes, "baseline or enhanced")->check(CLI::IsMember(mode_names))->required();
  CLI::App* study = app.add_subcommand("study", "model quality against the valid share of training data");
  add_common(study);
  study->add_option("--repeats", o.repeats, "repeats per cell")->check(CLI::PositiveNumber);
  study->add_option("--format", o.formats, "csv or json")
      ->check(CLI::IsMember(std::vector<std::string>{"csv", "json"}))
      ->expected(1);
  CLI::App* plan = app.add_subcommand("plan", "repeated runs over workloads and modes, then a report");
  add_common(plan);
  add_tuning(plan);
  plan->add_option("--mode", o.modes, "modes to run (default both)")->check(CLI::IsMember(mode_names));
  plan->add_option("--repeats", o.repeats, "runs per workload and mode")->check(CLI::PositiveNumber);
  plan->add_option("--format", o.formats, "report formats (default all)")->check(CLI::IsMember(format_names));
  CLI::App* report = app.add_subcommand("report", "rebuild the report from finished runs");
  add_common(report);
  report->add_option("--format", o.formats, "report formats (default all)")->check(CLI::IsMember(format_names));

  CLI11_PARSE(app, argc, argv);
  try {
    if (gen->parsed()) return GenSpace(o);
    if (truth->parsed()) return RecordTruth(o);
    if (pre->parsed()) return RunPresample(o);
    if (tune->parsed()) return Tune(o);
    if (study->parsed()) return Study(o);
    if (plan->parsed()) return Plan(o);
    if (report->parsed()) return Report(o);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
