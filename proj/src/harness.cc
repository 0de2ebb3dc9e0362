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
 * \file harness.cc
 * \brief Experiment plans, the run worker pool and resumable run files.
 */
#include "hatune/harness.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "hatune/random.h"
#include "hatune/sampler.h"
#include "json.hpp"

namespace hatune {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

constexpr const char* kRunFormat = "hatune-run";
constexpr int kRunVersion = 1;

uint64_t Fnv1a(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string Hex16(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json WorkloadJson(const WorkloadSpec& w) {
  return {{"id", w.id},
          {"batch", w.batch},
          {"image_h", w.image_h},
          {"image_w", w.image_w},
          {"channel_in", w.channel_in},
          {"channel_out", w.channel_out},
          {"kernel_h", w.kernel_h},
          {"kernel_w", w.kernel_w},
          {"stride", w.stride},
          {"pad", w.pad}};
}

json BudgetJson(const HardwareBudget& hw) {
  return {{"input", hw.input_buffer_bytes}, {"weight", hw.weight_buffer_bytes}, {"accum", hw.accum_buffer_bytes},
          {"elem", hw.elem_bytes},       {"setup", hw.dma_setup_cycles},      {"lanes", hw.compute_lanes}};
}

json ConfigJson(const TunerConfig& c) {
  return {{"epoch_size", c.epoch_size},   {"total_trials", c.total_trials},
          {"initial_valid", c.initial_valid}, {"sa_population", c.sa_population},
          {"sa_steps", c.sa_steps},       {"sa_initial_temp", c.sa_initial_temp},
          {"sa_cooling", c.sa_cooling},   {"mode", TunerModeName(c.mode)},
          {"bias_valid", c.bias_valid},   {"bias_invalid", c.bias_invalid},
          {"seed", c.seed},               {"trees", c.model.n_trees},
          {"depth", c.model.max_depth},   {"lr", c.model.learning_rate},
          {"min_leaf", c.model.min_samples_leaf}, {"subsample", c.model.subsample}};
}

const TunerConfig& ModeTemplate(const ExperimentPlan& plan, TunerMode mode) {
  for (const TunerConfig& c : plan.modes) {
    if (c.mode == mode) return c;
  }
  throw std::invalid_argument(std::string("plan has no ") + TunerModeName(mode) + " mode");
}

const SuiteEntry& PlanEntry(const ExperimentPlan& plan, const std::string& id) {
  for (const SuiteEntry& e : plan.workloads) {
    if (e.workload.id == id) return e;
  }
  throw std::out_of_range("plan has no workload " + id);
}

TunerConfig RunConfig(const ExperimentPlan& plan, const RunKey& key) {
  TunerConfig cfg = ModeTemplate(plan, key.mode);
  cfg.seed = key.seed;
  return cfg;
}

/*! \brief Hash over everything that determines a run's output. */
uint64_t RunHash(const ExperimentPlan& plan, const RunKey& key, uint64_t space_hash) {
  const SuiteEntry& entry = PlanEntry(plan, key.workload_id);
  json j = {{"workload", WorkloadJson(entry.workload)},
            {"budget", BudgetJson(entry.budget)},
            {"config", ConfigJson(RunConfig(plan, key))},
            {"space", Hex16(space_hash)}};
  if (key.mode == TunerMode::kEnhanced) {
    j["presample"] = {plan.presample_budget, plan.presample_parallel};
  }
  return Fnv1a(j.dump());
}

std::string RunStem(const RunKey& key, uint64_t hash) {
  return key.workload_id + "-" + TunerModeName(key.mode) + "-" + std::to_string(key.seed) + "-" + Hex16(hash);
}

void WriteAtomically(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json TimingsJson(const PhaseTimings& t) {
  return {{"presample", t.presample}, {"fit", t.fit}, {"select", t.select}, {"measure", t.measure}, {"total", t.total}};
}

PhaseTimings TimingsFromJson(const json& j) {
  PhaseTimings t;
  t.presample = j.at("presample").get<double>();
  t.fit = j.at("fit").get<double>();
  t.select = j.at("select").get<double>();
  t.measure = j.at("measure").get<double>();
  t.total = j.at("total").get<double>();
  return t;
}

}  // namespace

int WorkerCount() {
  if (const char* env = std::getenv("HATUNE_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) return static_cast<int>(n);
    throw std::invalid_argument(std::string("HATUNE_WORKERS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void ExperimentPlan::Validate() const {
  if (workloads.empty()) throw std::invalid_argument("plan has no workloads");
  if (modes.empty()) throw std::invalid_argument("plan has no modes");
  if (repeats < 1) throw std::invalid_argument("repeats must be at least 1");
  if (presample_budget < 1 || presample_parallel < 1) throw std::invalid_argument("bad presample parameters");
  if (workers < 0) throw std::invalid_argument("workers must be non-negative");
  for (size_t i = 0; i < modes.size(); ++i) {
    modes[i].Validate();
    for (size_t j = 0; j < i; ++j) {
      if (modes[i].mode == modes[j].mode) throw std::invalid_argument("duplicate mode in plan");
    }
  }
  for (size_t i = 0; i < workloads.size(); ++i) {
    for (size_t j = 0; j < i; ++j) {
      if (workloads[i].workload.id == workloads[j].workload.id) {
        throw std::invalid_argument("duplicate workload " + workloads[i].workload.id);
      }
    }
  }
}

std::vector<RunKey> EnumerateRuns(const ExperimentPlan& plan) {
  std::vector<RunKey> keys;
  uint64_t index = 0;
  for (const SuiteEntry& e : plan.workloads) {
    for (const TunerConfig& c : plan.modes) {
      for (int r = 0; r < plan.repeats; ++r) {
        keys.push_back({e.workload.id, c.mode, r, plan.base_seed + index});
        ++index;
      }
    }
  }
  return keys;
}

const CellSummary& ExperimentReport::Cell(const std::string& workload_id, TunerMode mode) const {
  for (const CellSummary& c : cells) {
    if (c.workload_id == workload_id && c.mode == mode) return c;
  }
  throw std::out_of_range("no cell " + workload_id + "/" + TunerModeName(mode));
}

std::vector<const RunResult*> ExperimentReport::CellRuns(const std::string& workload_id, TunerMode mode) const {
  std::vector<const RunResult*> out;
  for (const RunResult& r : runs) {
    if (r.key.workload_id == workload_id && r.key.mode == mode) out.push_back(&r);
  }
  return out;
}

GroundTruthTable LoadOrRecordTruth(const SuiteEntry& entry, const SearchSpace& space, const std::string& dir) {
  if (dir.empty()) return RecordGroundTruth(entry.workload, entry.budget);
  const fs::path path = fs::path(dir) / (entry.workload.id + ".json");
  if (fs::exists(path)) return LoadGroundTruth(path.string(), space);
  GroundTruthTable table = RecordGroundTruth(entry.workload, entry.budget);
  fs::create_directories(dir);
  SaveGroundTruth(table, path.string());
  return table;
}

TuningRun ExecuteRun(const RunKey& key, const ExperimentPlan& plan, const SearchSpace& space,
                     const GroundTruthTable& truth, RunResult* result) {
  const TunerConfig cfg = RunConfig(plan, key);
  TuningRun run;
  result->key = key;
  result->presample_valid_fraction = std::numeric_limits<double>::quiet_NaN();
  result->presample_size = 0;
  if (key.mode == TunerMode::kEnhanced) {
    const auto start = Clock::now();
    const PresampleSet presample =
        Presample(std::min<int64_t>(plan.presample_budget, space.size()), plan.presample_parallel, space,
                  [&truth](int64_t linear) { return truth.at(linear).valid; }, MixSeed(key.seed, 2));
    const double presample_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    run = RunTuning(space, truth, cfg, &presample);
    run.timings.presample = presample_seconds;
    run.timings.total += presample_seconds;
    result->presample_size = static_cast<int64_t>(presample.entries.size());
    result->presample_valid_fraction =
        static_cast<double>(presample.valid_subset.size()) / static_cast<double>(presample.entries.size());
  } else {
    run = RunTuning(space, truth, cfg);
  }
  result->stats = run.stats;
  result->timings = run.timings;
  result->total_trials = cfg.total_trials;
  result->valid_measured = run.valid_measured;
  result->known_invalid_measured = run.known_invalid_measured;
  result->known_invalid_selected = run.known_invalid_selected;
  return run;
}

ExperimentReport RunPlan(const ExperimentPlan& plan) {
  plan.Validate();
  const std::vector<RunKey> keys = EnumerateRuns(plan);
  const bool on_disk = !plan.output_dir.empty();
  const fs::path run_dir = on_disk ? fs::path(plan.output_dir) / "runs" : fs::path();
  const std::string truth_dir = on_disk ? (fs::path(plan.output_dir) / "truth").string() : std::string();
  if (on_disk) fs::create_directories(run_dir);

  std::map<std::string, size_t> slot;
  std::vector<SearchSpace> spaces;
  std::vector<GroundTruthTable> truths;
  spaces.reserve(plan.workloads.size());
  for (const SuiteEntry& e : plan.workloads) {
    slot[e.workload.id] = spaces.size();
    spaces.push_back(GenerateSpace(e.workload));
    truths.push_back(LoadOrRecordTruth(e, spaces.back(), truth_dir));
  }

  std::vector<RunResult> results(keys.size());
  std::atomic<size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr error;
  auto worker = [&]() {
    for (size_t i = next++; i < keys.size(); i = next++) {
      {
        std::lock_guard<std::mutex> lock(error_mu);
        if (error) return;
      }
      try {
        const RunKey& key = keys[i];
        const size_t w = slot.at(key.workload_id);
        if (!on_disk) {
          ExecuteRun(key, plan, spaces[w], truths[w], &results[i]);
          continue;
        }
        const std::string stem = RunStem(key, RunHash(plan, key, spaces[w].Hash()));
        const fs::path record = run_dir / (stem + ".json");
        if (fs::exists(record)) {
          results[i] = RunResultFromJson(ReadFile(record));
          continue;
        }
        const TuningRun run = ExecuteRun(key, plan, spaces[w], truths[w], &results[i]);
        // The log lands first so a present record always has its log.
        WriteAtomically(run_dir / (stem + ".jsonl"), RunLogToJsonLines(run.log));
        WriteAtomically(record, RunResultToJson(results[i]));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(plan.workers > 0 ? plan.workers : WorkerCount(),
                                                static_cast<int>(keys.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  std::vector<std::string> ids;
  for (const SuiteEntry& e : plan.workloads) ids.push_back(e.workload.id);
  std::vector<TunerMode> modes;
  for (const TunerConfig& c : plan.modes) modes.push_back(c.mode);
  return AssembleReport(std::move(ids), std::move(modes), std::move(results));
}

ExperimentReport AssembleReport(std::vector<std::string> workload_ids, std::vector<TunerMode> modes,
                                std::vector<RunResult> runs) {
  if (runs.empty()) throw std::invalid_argument("report has no runs");
  auto workload_rank = [&workload_ids](const std::string& id) {
    auto it = std::find(workload_ids.begin(), workload_ids.end(), id);
    if (it == workload_ids.end()) throw std::invalid_argument("run for unknown workload " + id);
    return it - workload_ids.begin();
  };
  auto mode_rank = [&modes](TunerMode m) {
    auto it = std::find(modes.begin(), modes.end(), m);
    if (it == modes.end()) throw std::invalid_argument(std::string("run for unknown mode ") + TunerModeName(m));
    return it - modes.begin();
  };
  std::sort(runs.begin(), runs.end(), [&](const RunResult& a, const RunResult& b) {
    const auto ka = std::make_tuple(workload_rank(a.key.workload_id), mode_rank(a.key.mode), a.key.repeat);
    const auto kb = std::make_tuple(workload_rank(b.key.workload_id), mode_rank(b.key.mode), b.key.repeat);
    return ka < kb;
  });

  ExperimentReport report;
  report.workload_ids = std::move(workload_ids);
  report.modes = std::move(modes);
  report.runs = std::move(runs);
  for (const std::string& id : report.workload_ids) {
    for (TunerMode mode : report.modes) {
      const std::vector<const RunResult*> members = report.CellRuns(id, mode);
      if (members.empty()) throw std::invalid_argument("no runs for cell " + id + "/" + TunerModeName(mode));
      CellSummary cell;
      cell.workload_id = id;
      cell.mode = mode;
      std::vector<RunStatistics> stats;
      for (const RunResult* r : members) {
        stats.push_back(r->stats);
        cell.mean_timings.presample += r->timings.presample;
        cell.mean_timings.fit += r->timings.fit;
        cell.mean_timings.select += r->timings.select;
        cell.mean_timings.measure += r->timings.measure;
        cell.mean_timings.total += r->timings.total;
        cell.known_invalid_measured += r->known_invalid_measured;
        cell.known_invalid_selected += r->known_invalid_selected;
      }
      const double n = static_cast<double>(members.size());
      cell.mean_timings.presample /= n;
      cell.mean_timings.fit /= n;
      cell.mean_timings.select /= n;
      cell.mean_timings.measure /= n;
      cell.mean_timings.total /= n;
      cell.trials_to_best = AggregateRuns(stats);
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

ExperimentReport LoadReport(const std::string& output_dir, const std::vector<std::string>& workload_ids) {
  const fs::path run_dir = fs::path(output_dir) / "runs";
  if (!fs::is_directory(run_dir)) throw std::runtime_error("no run directory under " + output_dir);
  std::vector<fs::path> files;
  for (const auto& item : fs::directory_iterator(run_dir)) {
    if (item.path().extension() == ".json") files.push_back(item.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RunResult> runs;
  std::vector<std::string> ids;
  std::vector<TunerMode> modes;
  for (const fs::path& f : files) {
    RunResult r = RunResultFromJson(ReadFile(f));
    if (std::find(workload_ids.begin(), workload_ids.end(), r.key.workload_id) == workload_ids.end()) continue;
    if (std::find(ids.begin(), ids.end(), r.key.workload_id) == ids.end()) ids.push_back(r.key.workload_id);
    if (std::find(modes.begin(), modes.end(), r.key.mode) == modes.end()) modes.push_back(r.key.mode);
    runs.push_back(std::move(r));
  }
  std::vector<std::string> ordered;
  for (const std::string& id : workload_ids) {
    if (std::find(ids.begin(), ids.end(), id) != ids.end()) ordered.push_back(id);
  }
  std::sort(modes.begin(), modes.end());
  return AssembleReport(std::move(ordered), std::move(modes), std::move(runs));
}

std::string RunResultToJson(const RunResult& r) {
  nlohmann::ordered_json j;
  j["format"] = kRunFormat;
  j["version"] = kRunVersion;
  j["workload_id"] = r.key.workload_id;
  j["mode"] = TunerModeName(r.key.mode);
  j["repeat"] = r.key.repeat;
  j["seed"] = r.key.seed;
  j["total_trials"] = r.total_trials;
  j["trials_to_best"] = r.stats.trials_to_best;
  j["valid_measured"] = r.valid_measured;
  j["known_invalid_measured"] = r.known_invalid_measured;
  j["known_invalid_selected"] = r.known_invalid_selected;
  j["presample_size"] = r.presample_size;
  if (std::isnan(r.presample_valid_fraction)) {
    j["presample_valid_fraction"] = nullptr;
  } else {
    j["presample_valid_fraction"] = r.presample_valid_fraction;
  }
  j["timings"] = TimingsJson(r.timings);
  json curve = json::array();
  for (const auto& point : r.stats.convergence_curve) curve.push_back(point.second);
  j["best_so_far"] = std::move(curve);
  return j.dump() + "\n";
}

RunResult RunResultFromJson(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("format").get<std::string>() != kRunFormat) throw std::runtime_error("not a run record");
  if (j.at("version").get<int>() != kRunVersion) throw std::runtime_error("unsupported run record version");
  RunResult r;
  r.key.workload_id = j.at("workload_id").get<std::string>();
  r.key.mode = ParseTunerMode(j.at("mode").get<std::string>());
  r.key.repeat = j.at("repeat").get<int>();
  r.key.seed = j.at("seed").get<uint64_t>();
  r.total_trials = j.at("total_trials").get<int64_t>();
  r.stats.trials_to_best = j.at("trials_to_best").get<int64_t>();
  r.valid_measured = j.at("valid_measured").get<int64_t>();
  r.known_invalid_measured = j.at("known_invalid_measured").get<int64_t>();
  r.known_invalid_selected = j.at("known_invalid_selected").get<int64_t>();
  r.presample_size = j.at("presample_size").get<int64_t>();
  const json& frac = j.at("presample_valid_fraction");
  r.presample_valid_fraction = frac.is_null() ? std::numeric_limits<double>::quiet_NaN() : frac.get<double>();
  r.timings = TimingsFromJson(j.at("timings"));
  int64_t trial = 0;
  for (const json& v : j.at("best_so_far")) r.stats.convergence_curve.emplace_back(++trial, v.get<double>());
  return r;
}

ComparisonSummary CompareModes(const ExperimentReport& report) {
  ComparisonSummary summary;
  for (const std::string& id : report.workload_ids) {
    const AggregateStatistics& b = report.Cell(id, TunerMode::kBaseline).trials_to_best;
    const AggregateStatistics& e = report.Cell(id, TunerMode::kEnhanced).trials_to_best;
    ModeComparison c;
    c.workload_id = id;
    c.baseline_median = b.median;
    c.enhanced_median = e.median;
    c.median_ratio = e.median / b.median;
    c.baseline_iqr = b.iqr;
    c.enhanced_iqr = e.iqr;
    if (b.iqr > 0) {
      c.iqr_ratio = e.iqr / b.iqr;
    } else {
      c.iqr_ratio = e.iqr > 0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    c.enhanced_wins = e.median <= b.median;
    summary.mean_median_ratio += c.median_ratio;
    summary.mean_iqr_ratio += c.iqr_ratio;
    summary.wins += c.enhanced_wins ? 1 : 0;
    summary.workloads.push_back(c);
  }
  if (!summary.workloads.empty()) {
    summary.mean_median_ratio /= static_cast<double>(summary.workloads.size());
    summary.mean_iqr_ratio /= static_cast<double>(summary.workloads.size());
  }
  return summary;
}

}  // namespace hatune
