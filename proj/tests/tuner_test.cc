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

#include <algorithm>
#include <set>

#include "hatune/oracle.h"
#include "hatune/random.h"
#include "hatune/sampler.h"
#include "hatune/suite.h"
#include "hatune/tuner.h"

namespace hatune {
namespace {

struct Fixture {
  SearchSpace space;
  GroundTruthTable truth;
};

/*! \brief A 384-configuration conv space with a mix of valid and invalid points. */
Fixture Tiny() {
  WorkloadSpec w;
  w.id = "tiny";
  w.channel_in = w.channel_out = 32;
  w.image_h = 2;
  w.image_w = 4;
  HardwareBudget hw;
  hw.input_buffer_bytes = 128;
  hw.weight_buffer_bytes = 1024;
  hw.accum_buffer_bytes = 128;
  return Fixture{GenerateSpace(w), RecordGroundTruth(w, hw)};
}

Fixture Suite(const std::string& id) {
  const SuiteEntry e = LoadSuite(DefaultSuitePath()).Find(id);
  return Fixture{GenerateSpace(e.workload), RecordGroundTruth(e.workload, e.budget)};
}

PresampleSet PresampleOf(const Fixture& f, int64_t budget, uint64_t seed) {
  return Presample(std::min(budget, f.space.size()), 8, f.space,
                   [&f](int64_t i) { return f.truth.at(i).valid; }, seed);
}

TunerConfig Config(TunerMode mode, int total, uint64_t seed) {
  TunerConfig c;
  c.mode = mode;
  c.total_trials = total;
  c.seed = seed;
  return c;
}

TEST(TunerConfig, Validation) {
  TunerConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.epoch_size = 800;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = TunerConfig{};
  c.sa_initial_temp = 0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = TunerConfig{};
  c.bias_invalid = 1;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  EXPECT_EQ(ParseTunerMode("enhanced"), TunerMode::kEnhanced);
  EXPECT_STREQ(TunerModeName(TunerMode::kBaseline), "baseline");
  EXPECT_THROW(ParseTunerMode("greedy"), std::invalid_argument);
}

TEST(BiasedScore, Rules) {
  const Fixture f = Tiny();
  Tuner t(f.space, Config(TunerMode::kEnhanced, 100, 0));
  PresampleSet p;
  p.entries = {{0, true}, {1, false}};
  t.SetKnownValidity(p);
  EXPECT_EQ(t.BiasedScore(2), 0.0);
  EXPECT_EQ(t.BiasedScore(0), t.config().bias_valid);
  EXPECT_EQ(t.BiasedScore(1), -1e6);
  EXPECT_GT(t.BiasedScore(0), t.BiasedScore(2));
}

TEST(BiasedScore, BaselineCarriesNoLabels) {
  const Fixture f = Tiny();
  Tuner t(f.space, Config(TunerMode::kBaseline, 100, 0));
  EXPECT_FALSE(t.has_known_validity());
  EXPECT_THROW(t.SetKnownValidity(PresampleSet{}), std::logic_error);
  for (int64_t i = 0; i < f.space.size(); ++i) ASSERT_EQ(t.BiasedScore(i), 0.0);
}

TEST(SelectBatch, ReturnsEverythingWhenFewRemain) {
  const Fixture f = Tiny();
  Tuner t(f.space, Config(TunerMode::kBaseline, 100, 0));
  for (int64_t i = 0; i < f.space.size() - 5; ++i) t.Record(i, f.truth.at(i));
  Random rng(1);
  const auto batch = t.SelectBatch(10, &rng);
  std::vector<int64_t> sorted = batch;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int64_t> want;
  for (int64_t i = f.space.size() - 5; i < f.space.size(); ++i) want.push_back(i);
  EXPECT_EQ(sorted, want);
  EXPECT_THROW(t.Record(0, f.truth.at(0)), std::logic_error);
}

/*! \brief With exact predictions and full validity labels the batch is the true top-k of the valid configurations. */
TEST(SelectBatch, TrainedToTruthPicksTopValid) {
  const Fixture f = Tiny();
  ASSERT_LE(f.space.size(), 500);
  ASSERT_GT(f.truth.valid_count(), 20);
  ASSERT_LT(f.truth.valid_count(), f.space.size());

  std::vector<int64_t> all(f.space.size());
  std::vector<MeasurementResult> results;
  for (int64_t i = 0; i < f.space.size(); ++i) {
    all[i] = i;
    results.push_back(f.truth.at(i));
  }
  BoostingParams exact;
  exact.n_trees = 1;
  exact.learning_rate = 1.0;
  exact.max_depth = 32;
  exact.min_samples_leaf = 1;
  const TrainingSet ts = BuildTrainingSet(f.space, all, results);
  GradientBoostedTrees model(exact);
  model.Fit(ts);
  for (int64_t i = 0; i < f.space.size(); ++i) ASSERT_NEAR(model.Predict(ts.features.row(i).transpose()), ts.targets[i], 1e-12);

  PresampleSet labels;
  for (int64_t i = 0; i < f.space.size(); ++i) labels.entries.push_back({i, f.truth.at(i).valid});
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Tuner t(f.space, Config(TunerMode::kEnhanced, 100, seed));
    t.SetKnownValidity(labels);
    t.SetModel(model);
    Random rng(seed);
    const int k = 10;
    std::vector<double> got;
    for (int64_t c : t.SelectBatch(k, &rng)) {
      ASSERT_TRUE(f.truth.at(c).valid);
      got.push_back(f.truth.at(c).gflops);
    }
    std::vector<double> want;
    for (int64_t i = 0; i < f.space.size(); ++i) {
      if (f.truth.at(i).valid) want.push_back(f.truth.at(i).gflops);
    }
    std::sort(want.rbegin(), want.rend());
    want.resize(k);
    std::sort(got.rbegin(), got.rend());
    EXPECT_EQ(got, want);
  }
}

void CheckRunInvariants(const TuningRun& run, const Fixture& f, int total, int epoch) {
  ASSERT_EQ(static_cast<int>(run.log.size()), total);
  std::set<int64_t> seen;
  double best = 0;
  for (size_t i = 0; i < run.log.size(); ++i) {
    const TrialRecord& r = run.log[i];
    ASSERT_EQ(r.trial, static_cast<int64_t>(i) + 1);
    ASSERT_TRUE(seen.insert(r.linear).second) << "config measured twice";
    ASSERT_EQ(r.valid, f.truth.at(r.linear).valid);
    ASSERT_EQ(r.gflops, f.truth.at(r.linear).gflops);
    best = std::max(best, r.gflops);
    ASSERT_EQ(r.best_so_far, best);
    ASSERT_EQ(run.stats.convergence_curve[i].second, best);
  }
  if (run.stats.trials_to_best <= total) {
    ASSERT_EQ(run.log[run.stats.trials_to_best - 1].gflops, f.truth.best_gflops());
    for (int64_t i = 0; i + 1 < run.stats.trials_to_best; ++i) ASSERT_LT(run.log[i].gflops, f.truth.best_gflops());
  } else {
    ASSERT_EQ(run.stats.trials_to_best, total + 1);
    ASSERT_LT(best, f.truth.best_gflops());
  }
  (void)epoch;
}

TEST(RunTuning, BaselineInvariants) {
  const Fixture f = Suite("48");
  for (uint64_t seed : {1, 2}) {
    const TuningRun run = RunTuning(f.space, f.truth, Config(TunerMode::kBaseline, 300, seed));
    CheckRunInvariants(run, f, 300, 50);
    EXPECT_EQ(run.known_invalid_measured, 0);
    EXPECT_EQ(run.known_invalid_selected, 0);
    EXPECT_GE(run.timings.total, run.timings.PhaseSum() * 0.999);
  }
}

TEST(RunTuning, EnhancedNeverMeasuresKnownInvalid) {
  const Fixture f = Suite("48");
  for (uint64_t seed : {3, 4}) {
    const PresampleSet p = PresampleOf(f, 1000, seed);
    const TuningRun run = RunTuning(f.space, f.truth, Config(TunerMode::kEnhanced, 300, seed), &p);
    CheckRunInvariants(run, f, 300, 50);
    std::set<int64_t> known_invalid(p.invalid_subset.begin(), p.invalid_subset.end());
    // The initial batch deliberately holds presampled invalids; later batches must not.
    for (size_t i = 50; i < run.log.size(); ++i) ASSERT_EQ(known_invalid.count(run.log[i].linear), 0u);
    EXPECT_EQ(run.known_invalid_measured, static_cast<int64_t>(std::min<size_t>(p.invalid_subset.size(), 25)));
    EXPECT_EQ(run.known_invalid_selected, 0);
  }
}

TEST(RunTuning, EnhancedRequiresPresample) {
  const Fixture f = Tiny();
  EXPECT_THROW(RunTuning(f.space, f.truth, Config(TunerMode::kEnhanced, 100, 0)), std::invalid_argument);
}

TEST(RunTuning, TruncatedFinalEpoch) {
  const Fixture f = Suite("3");
  const TuningRun run = RunTuning(f.space, f.truth, Config(TunerMode::kBaseline, 120, 5));
  CheckRunInvariants(run, f, 120, 50);
}

TEST(RunTuning, BitReproducible) {
  const Fixture f = Suite("48");
  const PresampleSet p = PresampleOf(f, 1000, 8);
  for (TunerMode mode : {TunerMode::kBaseline, TunerMode::kEnhanced}) {
    const TuningRun a = RunTuning(f.space, f.truth, Config(mode, 250, 8), &p);
    const TuningRun b = RunTuning(f.space, f.truth, Config(mode, 250, 8), &p);
    EXPECT_EQ(RunLogToJsonLines(a.log), RunLogToJsonLines(b.log));
    const TuningRun c = RunTuning(f.space, f.truth, Config(mode, 250, 9), &p);
    EXPECT_NE(RunLogToJsonLines(a.log), RunLogToJsonLines(c.log));
  }
}

TEST(RunTuning, SingleValidFoundInFirstEpoch) {
  const Fixture f = Tiny();
  std::vector<MeasurementResult> entries(f.space.size());
  const int64_t only = 137;
  entries[only] = MeasurementResult{true, 1.0};
  const GroundTruthTable truth("tiny", f.space.Hash(), entries);
  const PresampleSet p = Presample(f.space.size(), 8, f.space, [&](int64_t i) { return truth.at(i).valid; }, 1);
  const TuningRun run = RunTuning(f.space, truth, Config(TunerMode::kEnhanced, 100, 1), &p);
  EXPECT_LE(run.stats.trials_to_best, 50);
}

TEST(RunTuning, EndsWhenNothingSelectable) {
  // Presampling covers the whole space, so only valid configurations stay selectable.
  const Fixture f = Tiny();
  const PresampleSet p = PresampleOf(f, f.space.size(), 2);
  const TuningRun run = RunTuning(f.space, f.truth, Config(TunerMode::kEnhanced, 350, 2), &p);
  EXPECT_EQ(run.valid_measured, f.truth.valid_count());
  EXPECT_LT(static_cast<int64_t>(run.log.size()), 350);
  EXPECT_LE(run.stats.trials_to_best, static_cast<int64_t>(run.log.size()));
}

TEST(RunLog, JsonLinesSchema) {
  const std::vector<TrialRecord> log = {{1, 5, true, 2.5, 2.5}, {2, 9, false, 0, 2.5}};
  EXPECT_EQ(RunLogToJsonLines(log),
            "{\"trial\":1,\"linear\":5,\"valid\":true,\"gflops\":2.5,\"best_so_far\":2.5}\n"
            "{\"trial\":2,\"linear\":9,\"valid\":false,\"gflops\":0.0,\"best_so_far\":2.5}\n");
}

}  // namespace
}  // namespace hatune
