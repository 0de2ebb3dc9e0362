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
 * \file hatune/harness.h
 * \brief Repeated tuning runs over the workload suite, with resumable
 *  on-disk results and per-cell aggregation.
 */
#ifndef HATUNE_HARNESS_H_
#define HATUNE_HARNESS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hatune/metrics.h"
#include "hatune/oracle.h"
#include "hatune/study.h"
#include "hatune/suite.h"
#include "hatune/tuner.h"

namespace hatune {

/*! \brief Worker count from HATUNE_WORKERS, else the hardware concurrency (at least 1). */
int WorkerCount();

struct ExperimentPlan {
  std::vector<SuiteEntry> workloads;
  /*! \brief One template per mode; the seed field is replaced per run. */
  std::vector<TunerConfig> modes;
  int repeats = 20;
  uint64_t base_seed = 0;
  /*! \brief Run files and truth tables go here; empty keeps everything in memory. */
  std::string output_dir;
  int64_t presample_budget = 1000;
  int presample_parallel = 8;
  /*! \brief 0 selects WorkerCount(). */
  int workers = 0;

  void Validate() const;
};

/*! \brief Identity of one run. Runs are numbered workload-major, then mode, then repeat. */
struct RunKey {
  std::string workload_id;
  TunerMode mode = TunerMode::kBaseline;
  int repeat = 0;
  /*! \brief base_seed + global run index. */
  uint64_t seed = 0;
};

std::vector<RunKey> EnumerateRuns(const ExperimentPlan& plan);

struct RunResult {
  RunKey key;
  RunStatistics stats;
  PhaseTimings timings;
  int64_t total_trials = 0;
  int64_t valid_measured = 0;
  int64_t known_invalid_measured = 0;
  /*! \brief Known invalids picked by the biased walk after the initial batch. */
  int64_t known_invalid_selected = 0;
  /*! \brief Valid share of the presample set; NaN for baseline runs. */
  double presample_valid_fraction = 0;
  int64_t presample_size = 0;
};

struct CellSummary {
  std::string workload_id;
  TunerMode mode = TunerMode::kBaseline;
  AggregateStatistics trials_to_best;
  /*! \brief Mean wall-clock seconds per phase over the cell's runs. */
  PhaseTimings mean_timings;
  int64_t known_invalid_measured = 0;
  int64_t known_invalid_selected = 0;
};

struct ExperimentReport {
  /*! \brief Workload ids in plan order. */
  std::vector<std::string> workload_ids;
  std::vector<TunerMode> modes;
  std::vector<RunResult> runs;
  std::vector<CellSummary> cells;
  std::map<std::string, StudyReport> studies;

  const CellSummary& Cell(const std::string& workload_id, TunerMode mode) const;
  std::vector<const RunResult*> CellRuns(const std::string& workload_id, TunerMode mode) const;
};

/*! \brief Ground truth for one suite entry, read from `dir` when present and recorded (and saved) otherwise. */
GroundTruthTable LoadOrRecordTruth(const SuiteEntry& entry, const SearchSpace& space, const std::string& dir);

/*!
 * \brief Runs one cell member: presampling for enhanced mode with budget
 *  min(presample_budget, |S|), then RunTuning.
 */
TuningRun ExecuteRun(const RunKey& key, const ExperimentPlan& plan, const SearchSpace& space,
                     const GroundTruthTable& truth, RunResult* result);

/*!
 * \brief Executes every run of the plan on a worker pool. With an output
 *  directory, each finished run leaves runs/<workload>-<mode>-<seed>-<hash>.json
 *  and a .jsonl trial log; runs whose file exists are loaded instead of rerun.
 */
ExperimentReport RunPlan(const ExperimentPlan& plan);

/*! \brief Builds cell summaries from raw runs, ordered by workload then mode. */
ExperimentReport AssembleReport(std::vector<std::string> workload_ids, std::vector<TunerMode> modes,
                                std::vector<RunResult> runs);

/*! \brief Reloads every run file below `output_dir`/runs and reassembles the report in `workload_ids` order. */
ExperimentReport LoadReport(const std::string& output_dir, const std::vector<std::string>& workload_ids);

std::string RunResultToJson(const RunResult& result);
RunResult RunResultFromJson(const std::string& text);

/*! \brief Enhanced against baseline for one workload. */
struct ModeComparison {
  std::string workload_id;
  double baseline_median = 0;
  double enhanced_median = 0;
  double median_ratio = 0;
  double baseline_iqr = 0;
  double enhanced_iqr = 0;
  /*! \brief 1 when both IQRs are zero; infinite when only the baseline's is. */
  double iqr_ratio = 0;
  bool enhanced_wins = false;
};

struct ComparisonSummary {
  std::vector<ModeComparison> workloads;
  double mean_median_ratio = 0;
  double mean_iqr_ratio = 0;
  int wins = 0;
};

/*! \brief Needs both modes in the report. */
ComparisonSummary CompareModes(const ExperimentReport& report);

}  // namespace hatune

#endif  // HATUNE_HARNESS_H_
