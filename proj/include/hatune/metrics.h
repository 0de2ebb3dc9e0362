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
 * \file hatune/metrics.h
 * \brief Ranking-quality metrics for performance models and run statistics
 *  for tuning convergence and robustness.
 *
 * Invalid configurations carry a measured score of exactly 0. All ranking
 * metrics depend on the predicted scores only through their order.
 */
#ifndef HATUNE_METRICS_H_
#define HATUNE_METRICS_H_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace hatune {

/*! \brief Which comparison pairs count towards pairwise accuracy. */
enum class PairFilter {
  /*! \brief every pair except invalid-invalid */
  kAllCountable,
  /*! \brief exactly one side valid */
  kValidInvalid,
  /*! \brief both sides valid */
  kValidValid,
};

/*!
 * \brief Fraction of counted pairs whose measured and predicted differences
 *  have the same sign, with sign(0) = 0.
 *
 * A predicted tie against a measured difference is incorrect; a measured tie
 * is only correct when the prediction ties as well. Throws when no pair is
 * countable.
 */
double PairwiseAccuracy(std::span<const double> predicted, std::span<const double> measured,
                        std::span<const uint8_t> valid, PairFilter filter = PairFilter::kAllCountable);

struct RankedItem {
  int64_t linear = 0;
  double predicted = 0;
  double measured = 0;
  bool valid = false;
};

/*! \brief Items sorted by predicted score descending, ties by ascending linear index. */
class RankedList {
 public:
  explicit RankedList(std::vector<RankedItem> items);
  RankedList(std::span<const int64_t> linear, std::span<const double> predicted, std::span<const double> measured,
             std::span<const uint8_t> valid);

  const std::vector<RankedItem>& items() const { return items_; }
  size_t size() const { return items_.size(); }

 private:
  std::vector<RankedItem> items_;
};

/*! \brief Share of valid items among the top n. */
double PrecisionAtN(const RankedList& ranked, int n);

/*! \brief DCG of the model order over the top n, rank-position discount log2(i + 1). */
double DcgAtN(const RankedList& ranked, int n);
/*! \brief DCG of the measured-descending order over the top n. */
double IdealDcgAtN(const RankedList& ranked, int n);
/*! \brief DcgAtN / IdealDcgAtN; throws when every measured score is zero. */
double NdcgAtN(const RankedList& ranked, int n);

/*! \brief Quantile by linear interpolation between order statistics (numpy's default). */
double Quantile(std::vector<double> values, double q);

struct RunStatistics {
  /*! \brief 1-based trial at which the global optimum was first measured; total_trials + 1 if never. */
  int64_t trials_to_best = 0;
  /*! \brief (trial, best gflops so far) for every trial. */
  std::vector<std::pair<int64_t, double>> convergence_curve;
};

struct AggregateStatistics {
  double median = 0;
  double q1 = 0;
  double q3 = 0;
  double iqr = 0;
  /*! \brief Box-plot whisker ends: most extreme samples within 1.5 IQR of the box. */
  double whisker_low = 0;
  double whisker_high = 0;
  std::vector<double> outliers;
  int64_t count = 0;
};

AggregateStatistics Summarize(std::span<const double> samples);
/*! \brief Summary of trials_to_best across runs. */
AggregateStatistics AggregateRuns(std::span<const RunStatistics> runs);

}  // namespace hatune

#endif  // HATUNE_METRICS_H_
