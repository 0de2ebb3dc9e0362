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
 * \file hatune/study.h
 * \brief Standalone evaluation of the performance model with a controlled
 *  share of valid configurations in its training data.
 */
#ifndef HATUNE_STUDY_H_
#define HATUNE_STUDY_H_

#include <cstdint>
#include <string>
#include <vector>

#include "hatune/oracle.h"
#include "hatune/surrogate.h"

namespace hatune {

struct StudyOptions {
  std::vector<double> ratios = {0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95};
  std::vector<int> sample_sizes = {200};
  /*! \brief Top-n cutoff for precision and nDCG (clamped to the test-set size). */
  int n_at = 10;
  int repeats = 10;
  uint64_t seed = 0;
  BoostingParams model;
};

/*!
 * \brief Mean metrics of one (ratio, sample size) cell. A metric that is
 *  undefined for a repeat (e.g. no valid pair in the test set) is left out
 *  of that metric's mean; the *_samples fields count what was averaged.
 */
struct StudyCell {
  std::string workload_id;
  double ratio = 0;
  int sample_size = 0;
  int valid_rows = 0;
  double ndcg = 0;
  double precision = 0;
  double accuracy_valid_invalid = 0;
  double accuracy_valid_valid = 0;
  int ndcg_samples = 0;
  int precision_samples = 0;
  int valid_invalid_samples = 0;
  int valid_valid_samples = 0;
};

struct StudyReport {
  int n_at = 0;
  std::vector<StudyCell> cells;

  /*! \brief Cell lookup by ratio and sample size; throws std::out_of_range when absent. */
  const StudyCell& At(double ratio, int sample_size) const;
};

/*!
 * \brief For every (ratio, sample size) and repeat: hold out a uniform random
 *  test set of sample_size / 3 configurations (a 75/25 split), train on
 *  exactly floor(ratio * sample_size) valid rows plus invalid rows drawn from
 *  the rest of the space, and score the untouched test set.
 *
 * Throws std::invalid_argument when the table has too few valid or invalid
 * configurations for a requested cell.
 */
StudyReport ControlledRatioStudy(const SearchSpace& space, const GroundTruthTable& truth, const StudyOptions& options);

/*! \brief Cell-wise mean over several workloads' reports (weighted by samples). */
StudyReport PoolStudies(const std::vector<StudyReport>& reports);

}  // namespace hatune

#endif  // HATUNE_STUDY_H_
