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
 * \file hatune/tuner.h
 * \brief Epoch-based model-guided tuning loop.
 *
 * Each epoch measures a batch against the ground-truth table, refits the
 * performance model on everything measured so far and picks the next batch
 * by simulated annealing over the model's scores. Baseline mode starts from
 * a uniform random batch with an untrained model. Enhanced mode starts from
 * a distance-maximized valid/invalid batch drawn from a presample set and
 * biases the annealing score with the presampled validity labels.
 */
#ifndef HATUNE_TUNER_H_
#define HATUNE_TUNER_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hatune/metrics.h"
#include "hatune/oracle.h"
#include "hatune/random.h"
#include "hatune/sampler.h"
#include "hatune/search_space.h"
#include "hatune/surrogate.h"

namespace hatune {

enum class TunerMode { kBaseline, kEnhanced };

const char* TunerModeName(TunerMode mode);
TunerMode ParseTunerMode(const std::string& name);

struct TunerConfig {
  int epoch_size = 50;
  int total_trials = 750;
  /*! \brief Cap on valid configurations in the enhanced initial batch. */
  int initial_valid = 25;
  int sa_population = 128;
  int sa_steps = 200;
  double sa_initial_temp = 1.0;
  double sa_cooling = 0.98;
  TunerMode mode = TunerMode::kBaseline;
  /*! \brief Added to the prediction of presampled valid configurations. */
  double bias_valid = 0.1;
  /*! \brief Score of presampled invalid configurations. */
  double bias_invalid = -1e6;
  uint64_t seed = 0;
  BoostingParams model;

  void Validate() const;
};

struct TrialRecord {
  int64_t trial = 0;
  int64_t linear = 0;
  bool valid = false;
  double gflops = 0;
  double best_so_far = 0;
};

/*! \brief Wall-clock seconds per phase of one run. */
struct PhaseTimings {
  double presample = 0;
  double fit = 0;
  double select = 0;
  double measure = 0;
  double total = 0;

  double PhaseSum() const { return presample + fit + select + measure; }
};

/*! \brief Mutable state of one tuning run over one search space. */
class Tuner {
 public:
  Tuner(const SearchSpace& space, TunerConfig config);

  /*! \brief Loads presampled validity labels; only meaningful in enhanced mode. */
  void SetKnownValidity(const PresampleSet& presample);

  /*!
   * \brief Model prediction, plus bias_valid for known valid configurations;
   *  bias_invalid replaces the score of known invalid ones.
   */
  double BiasedScore(int64_t linear);

  /*!
   * \brief Simulated annealing over BiasedScore: a population of random-walk
   *  points each proposes a one-knob mutation per step and accepts it by the
   *  Metropolis rule at temperature initial * cooling^step. Returns the k
   *  best-scoring distinct unmeasured configurations seen during the walk,
   *  excluding known invalid ones; fewer than k only when fewer remain.
   */
  std::vector<int64_t> SelectBatch(int k, Random* rng);

  /*! \brief Records a measurement; throws if the configuration was already measured. */
  void Record(int64_t linear, const MeasurementResult& result);
  /*! \brief Refits the model on every measurement so far. */
  void Refit(uint64_t seed);
  /*! \brief Replaces the model, e.g. with one trained elsewhere. */
  void SetModel(GradientBoostedTrees model);

  const SearchSpace& space() const { return space_; }
  const TunerConfig& config() const { return config_; }
  int64_t trial_count() const { return static_cast<int64_t>(measured_order_.size()); }
  int64_t best_index() const { return best_index_; }
  double best_gflops() const { return best_gflops_; }
  bool measured(int64_t linear) const { return measured_[linear] != 0; }
  /*! \brief -1 unknown, 0 known invalid, 1 known valid. */
  int known_validity(int64_t linear) const { return known_.empty() ? -1 : known_[linear]; }
  bool has_known_validity() const { return !known_.empty(); }
  /*! \brief Unmeasured configurations not known to be invalid. */
  int64_t selectable() const { return selectable_; }
  const GradientBoostedTrees& model() const { return model_; }

 private:
  double Prediction(int64_t linear);
  bool Selectable(int64_t linear) const { return !measured_[linear] && known_validity(linear) != 0; }
  int64_t Mutate(int64_t linear, Random* rng) const;

  const SearchSpace& space_;
  TunerConfig config_;
  std::vector<uint8_t> measured_;
  std::vector<int8_t> known_;
  std::vector<int64_t> measured_order_;
  std::vector<MeasurementResult> results_;
  int64_t best_index_ = -1;
  double best_gflops_ = 0;
  int64_t selectable_ = 0;
  GradientBoostedTrees model_;
  std::vector<int64_t> population_;
  std::vector<uint8_t> in_batch_;
  // Predictions cached for the current model.
  std::vector<double> cache_;
  std::vector<uint32_t> cache_stamp_;
  uint32_t model_version_ = 1;
  std::vector<int> mutable_knobs_;
};

struct TuningRun {
  RunStatistics stats;
  std::vector<TrialRecord> log;
  PhaseTimings timings;
  int64_t valid_measured = 0;
  /*! \brief Measured configurations that the presample had labelled invalid. */
  int64_t known_invalid_measured = 0;
  /*! \brief The subset of those chosen by the biased walk rather than the initial batch. */
  int64_t known_invalid_selected = 0;
};

/*!
 * \brief One complete tuning run. Enhanced mode requires `presample`;
 *  baseline mode ignores it. The run ends after total_trials measurements,
 *  or earlier once no selectable configuration is left.
 */
TuningRun RunTuning(const SearchSpace& space, const GroundTruthTable& truth, const TunerConfig& config,
                    const PresampleSet* presample = nullptr);

/*! \brief JSON-lines run log, one record per trial. */
std::string RunLogToJsonLines(const std::vector<TrialRecord>& log);

}  // namespace hatune

#endif  // HATUNE_TUNER_H_
