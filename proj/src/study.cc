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

#include "hatune/study.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "hatune/metrics.h"
#include "hatune/random.h"

namespace hatune {

const StudyCell& StudyReport::At(double ratio, int sample_size) const {
  for (const StudyCell& cell : cells) {
    if (std::abs(cell.ratio - ratio) < 1e-12 && cell.sample_size == sample_size) return cell;
  }
  throw std::out_of_range("no study cell for the requested ratio and sample size");
}

StudyReport ControlledRatioStudy(const SearchSpace& space, const GroundTruthTable& truth, const StudyOptions& options) {
  truth.CheckCovers(space);
  if (options.repeats < 1 || options.n_at < 1) throw std::invalid_argument("study needs repeats >= 1 and n_at >= 1");

  std::vector<int64_t> valid_ids, invalid_ids;
  for (int64_t i = 0; i < truth.size(); ++i) (truth.at(i).valid ? valid_ids : invalid_ids).push_back(i);

  StudyReport report;
  report.n_at = options.n_at;
  uint64_t cell_index = 0;
  for (int sample_size : options.sample_sizes) {
    for (double ratio : options.ratios) {
      if (!(ratio > 0 && ratio < 1) || sample_size < 2) {
        throw std::invalid_argument("study ratios must lie in (0, 1) and sample sizes be >= 2");
      }
      const int test_size = std::max(1, static_cast<int>(std::lround(sample_size / 3.0)));
      const int n_valid = static_cast<int>(std::floor(ratio * sample_size + 1e-9));
      const int n_invalid = sample_size - n_valid;
      // Worst case the test set takes its share from the same pool.
      if (n_valid + test_size > static_cast<int64_t>(valid_ids.size()) ||
          n_invalid + test_size > static_cast<int64_t>(invalid_ids.size())) {
        throw std::invalid_argument("ratio " + std::to_string(ratio) + " at sample size " +
                                    std::to_string(sample_size) + " is unrealizable for workload '" +
                                    truth.workload_id() + "'");
      }

      StudyCell cell;
      cell.workload_id = truth.workload_id();
      cell.ratio = ratio;
      cell.sample_size = sample_size;
      cell.valid_rows = n_valid;
      for (int rep = 0; rep < options.repeats; ++rep) {
        Random rng(MixSeed(options.seed, cell_index * 7919 + rep));
        std::vector<int64_t> test = rng.SampleWithoutReplacement(truth.size(), test_size);
        std::vector<uint8_t> in_test(truth.size(), 0);
        for (int64_t t : test) in_test[t] = 1;

        auto draw = [&](const std::vector<int64_t>& pool, int count) {
          std::vector<int64_t> candidates;
          for (int64_t id : pool) {
            if (!in_test[id]) candidates.push_back(id);
          }
          std::vector<int64_t> picked;
          for (int64_t j : rng.SampleWithoutReplacement(static_cast<int64_t>(candidates.size()), count)) {
            picked.push_back(candidates[j]);
          }
          return picked;
        };
        std::vector<int64_t> train = draw(valid_ids, n_valid);
        for (int64_t id : draw(invalid_ids, n_invalid)) train.push_back(id);

        std::vector<MeasurementResult> train_results;
        for (int64_t id : train) train_results.push_back(truth.at(id));
        GradientBoostedTrees model(options.model);
        model.Fit(BuildTrainingSet(space, train, train_results), MixSeed(options.seed, rep));

        std::vector<double> predicted, measured;
        std::vector<uint8_t> valid;
        for (int64_t id : test) {
          predicted.push_back(model.Predict(Featurize(id, space)));
          measured.push_back(truth.at(id).gflops);
          valid.push_back(truth.at(id).valid ? 1 : 0);
        }
        const int64_t valid_in_test = std::count(valid.begin(), valid.end(), 1);
        const int64_t invalid_in_test = test_size - valid_in_test;
        const RankedList ranked(test, predicted, measured, valid);
        const int n = std::min(options.n_at, test_size);

        cell.precision += PrecisionAtN(ranked, n);
        ++cell.precision_samples;
        if (valid_in_test > 0) {
          cell.ndcg += NdcgAtN(ranked, n);
          ++cell.ndcg_samples;
        }
        if (valid_in_test > 0 && invalid_in_test > 0) {
          cell.accuracy_valid_invalid += PairwiseAccuracy(predicted, measured, valid, PairFilter::kValidInvalid);
          ++cell.valid_invalid_samples;
        }
        if (valid_in_test > 1) {
          cell.accuracy_valid_valid += PairwiseAccuracy(predicted, measured, valid, PairFilter::kValidValid);
          ++cell.valid_valid_samples;
        }
      }
      auto mean = [](double sum, int count) { return count > 0 ? sum / count : std::nan(""); };
      cell.precision = mean(cell.precision, cell.precision_samples);
      cell.ndcg = mean(cell.ndcg, cell.ndcg_samples);
      cell.accuracy_valid_invalid = mean(cell.accuracy_valid_invalid, cell.valid_invalid_samples);
      cell.accuracy_valid_valid = mean(cell.accuracy_valid_valid, cell.valid_valid_samples);
      report.cells.push_back(cell);
      ++cell_index;
    }
  }
  return report;
}

StudyReport PoolStudies(const std::vector<StudyReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("no study reports to pool");
  StudyReport pooled;
  pooled.n_at = reports.front().n_at;
  std::map<std::pair<double, int>, StudyCell> cells;
  std::vector<std::pair<double, int>> order;
  for (const StudyReport& report : reports) {
    for (const StudyCell& c : report.cells) {
      auto key = std::make_pair(c.ratio, c.sample_size);
      auto [it, inserted] = cells.try_emplace(key);
      StudyCell& acc = it->second;
      if (inserted) {
        order.push_back(key);
        acc.workload_id = "pooled";
        acc.ratio = c.ratio;
        acc.sample_size = c.sample_size;
        acc.valid_rows = c.valid_rows;
      }
      auto add = [](double& sum, int& n, double mean, int count) {
        if (count > 0) {
          sum += mean * count;
          n += count;
        }
      };
      add(acc.ndcg, acc.ndcg_samples, c.ndcg, c.ndcg_samples);
      add(acc.precision, acc.precision_samples, c.precision, c.precision_samples);
      add(acc.accuracy_valid_invalid, acc.valid_invalid_samples, c.accuracy_valid_invalid, c.valid_invalid_samples);
      add(acc.accuracy_valid_valid, acc.valid_valid_samples, c.accuracy_valid_valid, c.valid_valid_samples);
    }
  }
  for (const auto& key : order) {
    StudyCell c = cells.at(key);
    auto finish = [](double sum, int n) { return n > 0 ? sum / n : std::nan(""); };
    c.ndcg = finish(c.ndcg, c.ndcg_samples);
    c.precision = finish(c.precision, c.precision_samples);
    c.accuracy_valid_invalid = finish(c.accuracy_valid_invalid, c.valid_invalid_samples);
    c.accuracy_valid_valid = finish(c.accuracy_valid_valid, c.valid_valid_samples);
    pooled.cells.push_back(c);
  }
  return pooled;
}

}  // namespace hatune
