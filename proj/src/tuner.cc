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

#include "hatune/tuner.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"

namespace hatune {

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) { return std::chrono::duration<double>(Clock::now() - since).count(); }

struct Scored {
  double score;
  uint64_t tiebreak;
  int64_t linear;
};

/*! \brief True when a ranks below b. */
bool Worse(const Scored& a, const Scored& b) {
  if (a.score != b.score) return a.score < b.score;
  return a.tiebreak < b.tiebreak;
}

}  // namespace

const char* TunerModeName(TunerMode mode) { return mode == TunerMode::kBaseline ? "baseline" : "enhanced"; }

TunerMode ParseTunerMode(const std::string& name) {
  if (name == "baseline") return TunerMode::kBaseline;
  if (name == "enhanced") return TunerMode::kEnhanced;
  throw std::invalid_argument("unknown tuner mode '" + name + "' (expected baseline or enhanced)");
}

void TunerConfig::Validate() const {
  if (epoch_size < 1 || total_trials < 1 || epoch_size > total_trials) {
    throw std::invalid_argument("tuner needs 1 <= epoch_size <= total_trials");
  }
  if (initial_valid < 0 || sa_population < 1 || sa_steps < 0) throw std::invalid_argument("invalid annealing sizes");
  if (!(sa_initial_temp > 0) || !(sa_cooling > 0) || sa_cooling > 1) {
    throw std::invalid_argument("annealing temperature must be positive and cooling in (0, 1]");
  }
  if (!(bias_invalid < 0) || !(bias_valid > 0)) throw std::invalid_argument("biases need bias_invalid < 0 < bias_valid");
}

Tuner::Tuner(const SearchSpace& space, TunerConfig config)
    : space_(space),
      config_(config),
      measured_(space.size(), 0),
      selectable_(space.size()),
      model_(config.model),
      in_batch_(space.size(), 0),
      cache_(space.size(), 0.0),
      cache_stamp_(space.size(), 0) {
  config_.Validate();
  for (size_t k = 0; k < space.num_knobs(); ++k) {
    if (space.cardinality(k) > 1) mutable_knobs_.push_back(static_cast<int>(k));
  }
}

void Tuner::SetKnownValidity(const PresampleSet& presample) {
  if (config_.mode != TunerMode::kEnhanced) throw std::logic_error("validity bias is only used in enhanced mode");
  known_.assign(space_.size(), -1);
  for (const PresampleEntry& e : presample.entries) {
    if (e.linear < 0 || e.linear >= space_.size()) throw std::out_of_range("presample entry outside the space");
    known_[e.linear] = e.valid ? 1 : 0;
  }
  selectable_ = 0;
  for (int64_t i = 0; i < space_.size(); ++i) selectable_ += Selectable(i) ? 1 : 0;
  ++model_version_;
}

double Tuner::Prediction(int64_t linear) {
  if (cache_stamp_[linear] != model_version_) {
    cache_[linear] = model_.Predict(Featurize(linear, space_));
    cache_stamp_[linear] = model_version_;
  }
  return cache_[linear];
}

double Tuner::BiasedScore(int64_t linear) {
  switch (known_validity(linear)) {
    case 0:
      return config_.bias_invalid;
    case 1:
      return Prediction(linear) + config_.bias_valid;
    default:
      return Prediction(linear);
  }
}

int64_t Tuner::Mutate(int64_t linear, Random* rng) const {
  if (mutable_knobs_.empty()) return linear;
  const int k = mutable_knobs_[rng->UniformIndex(static_cast<int64_t>(mutable_knobs_.size()))];
  const int32_t current = space_.CoordOf(linear, k);
  int32_t next = static_cast<int32_t>(rng->UniformIndex(space_.cardinality(k) - 1));
  if (next >= current) ++next;
  return linear + (static_cast<int64_t>(next) - current) * space_.stride(k);
}

std::vector<int64_t> Tuner::SelectBatch(int k, Random* rng) {
  std::vector<int64_t> batch;
  if (k <= 0) return batch;
  if (selectable_ <= k) {
    for (int64_t i = 0; i < space_.size(); ++i) {
      if (Selectable(i)) batch.push_back(i);
    }
    return batch;
  }

  const uint64_t salt = rng->Next();
  std::vector<Scored> heap;  // min-heap of the k best seen so far
  std::vector<int64_t> touched;
  auto consider = [&](int64_t p, double score) {
    if (!Selectable(p) || in_batch_[p]) return;
    Scored s{score, MixSeed(salt, static_cast<uint64_t>(p)), p};
    if (static_cast<int>(heap.size()) == k) {
      if (!Worse(heap.front(), s)) return;
      std::pop_heap(heap.begin(), heap.end(), [](const Scored& a, const Scored& b) { return Worse(b, a); });
      in_batch_[heap.back().linear] = 0;
      heap.pop_back();
    }
    heap.push_back(s);
    std::push_heap(heap.begin(), heap.end(), [](const Scored& a, const Scored& b) { return Worse(b, a); });
    in_batch_[p] = 1;
    touched.push_back(p);
  };

  if (population_.empty()) {
    const int64_t n = std::min<int64_t>(config_.sa_population, space_.size());
    population_ = rng->SampleWithoutReplacement(space_.size(), n);
  }
  std::vector<double> scores(population_.size());
  for (size_t i = 0; i < population_.size(); ++i) {
    scores[i] = BiasedScore(population_[i]);
    consider(population_[i], scores[i]);
  }

  double temp = config_.sa_initial_temp;
  for (int step = 0; step < config_.sa_steps; ++step) {
    for (size_t i = 0; i < population_.size(); ++i) {
      const int64_t q = Mutate(population_[i], rng);
      const double sq = BiasedScore(q);
      consider(q, sq);
      const double delta = sq - scores[i];
      if (delta >= 0 || rng->UniformReal() < std::exp(delta / temp)) {
        population_[i] = q;
        scores[i] = sq;
      }
    }
    temp *= config_.sa_cooling;
  }

  std::sort(heap.begin(), heap.end(), [](const Scored& a, const Scored& b) { return Worse(b, a); });
  for (const Scored& s : heap) batch.push_back(s.linear);
  for (int64_t p : touched) in_batch_[p] = 0;

  // The walk can miss configurations when the population is stuck; top up randomly.
  while (static_cast<int>(batch.size()) < k) {
    int64_t p = rng->UniformIndex(space_.size());
    if (Selectable(p) && std::find(batch.begin(), batch.end(), p) == batch.end()) batch.push_back(p);
  }
  return batch;
}

void Tuner::Record(int64_t linear, const MeasurementResult& result) {
  if (linear < 0 || linear >= space_.size()) throw std::out_of_range("measured configuration outside the space");
  if (measured_[linear]) throw std::logic_error("configuration measured twice");
  if (Selectable(linear)) --selectable_;
  measured_[linear] = 1;
  measured_order_.push_back(linear);
  results_.push_back(result);
  if (result.valid && result.gflops > best_gflops_) {
    best_gflops_ = result.gflops;
    best_index_ = linear;
  }
}

void Tuner::Refit(uint64_t seed) {
  model_ = GradientBoostedTrees(config_.model);
  model_.Fit(BuildTrainingSet(space_, measured_order_, results_), seed);
  ++model_version_;
}

void Tuner::SetModel(GradientBoostedTrees model) {
  model_ = std::move(model);
  ++model_version_;
}

TuningRun RunTuning(const SearchSpace& space, const GroundTruthTable& truth, const TunerConfig& config,
                    const PresampleSet* presample) {
  const auto run_start = Clock::now();
  truth.CheckCovers(space);
  Tuner tuner(space, config);
  Random rng(config.seed);
  TuningRun run;

  std::vector<int64_t> batch;
  auto phase_start = Clock::now();
  if (config.mode == TunerMode::kEnhanced) {
    if (presample == nullptr) throw std::invalid_argument("enhanced tuning requires a presample set");
    tuner.SetKnownValidity(*presample);
    batch = SelectInitialBatch(*presample, space, config.epoch_size, config.initial_valid, MixSeed(config.seed, 1))
                .configs;
  } else {
    if (tuner.has_known_validity()) throw std::logic_error("baseline run must not carry validity labels");
    batch = rng.SampleWithoutReplacement(space.size(), std::min<int64_t>(config.epoch_size, space.size()));
  }
  if (static_cast<int64_t>(batch.size()) > config.total_trials) batch.resize(config.total_trials);
  run.timings.select += Seconds(phase_start);

  const double global_best = truth.best_gflops();
  run.stats.trials_to_best = config.total_trials + 1;
  uint64_t epoch = 0;
  while (!batch.empty()) {
    phase_start = Clock::now();
    for (int64_t linear : batch) {
      const MeasurementResult& result = truth.at(linear);
      if (tuner.known_validity(linear) == 0) {
        ++run.known_invalid_measured;
        if (epoch > 0) ++run.known_invalid_selected;
      }
      tuner.Record(linear, result);
      TrialRecord rec{tuner.trial_count(), linear, result.valid, result.gflops, tuner.best_gflops()};
      run.log.push_back(rec);
      run.stats.convergence_curve.emplace_back(rec.trial, rec.best_so_far);
      if (result.valid) ++run.valid_measured;
      if (result.valid && result.gflops == global_best && run.stats.trials_to_best > config.total_trials) {
        run.stats.trials_to_best = rec.trial;
      }
    }
    run.timings.measure += Seconds(phase_start);
    if (tuner.trial_count() >= config.total_trials) break;

    phase_start = Clock::now();
    tuner.Refit(MixSeed(config.seed, 1000 + epoch));
    run.timings.fit += Seconds(phase_start);

    phase_start = Clock::now();
    const int k = static_cast<int>(std::min<int64_t>(config.epoch_size, config.total_trials - tuner.trial_count()));
    batch = tuner.SelectBatch(k, &rng);
    run.timings.select += Seconds(phase_start);
    ++epoch;
  }
  run.timings.total = Seconds(run_start);
  return run;
}

std::string RunLogToJsonLines(const std::vector<TrialRecord>& log) {
  std::ostringstream out;
  for (const TrialRecord& r : log) {
    nlohmann::ordered_json line = {{"trial", r.trial},
                           {"linear", r.linear},
                           {"valid", r.valid},
                           {"gflops", r.gflops},
                           {"best_so_far", r.best_so_far}};
    out << line.dump() << "\n";
  }
  return out.str();
}

}  // namespace hatune
