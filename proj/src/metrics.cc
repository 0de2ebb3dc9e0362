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

#include "hatune/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hatune {

namespace {

int Sign(double x) { return (x > 0) - (x < 0); }

bool Counted(bool vi, bool vj, PairFilter filter) {
  switch (filter) {
    case PairFilter::kAllCountable:
      return vi || vj;
    case PairFilter::kValidInvalid:
      return vi != vj;
    case PairFilter::kValidValid:
      return vi && vj;
  }
  return false;
}

void CheckN(const RankedList& ranked, int n) {
  if (n < 1 || static_cast<size_t>(n) > ranked.size()) {
    throw std::out_of_range("top-n cutoff " + std::to_string(n) + " outside [1, " + std::to_string(ranked.size()) +
                            "]");
  }
}

}  // namespace

double PairwiseAccuracy(std::span<const double> predicted, std::span<const double> measured,
                        std::span<const uint8_t> valid, PairFilter filter) {
  const size_t n = predicted.size();
  if (measured.size() != n || valid.size() != n) throw std::invalid_argument("pairwise accuracy: length mismatch");
  int64_t correct = 0, total = 0;
  for (size_t i = 1; i < n; ++i) {
    for (size_t j = 0; j < i; ++j) {
      if (!Counted(valid[i] != 0, valid[j] != 0, filter)) continue;
      ++total;
      if (Sign(measured[i] - measured[j]) == Sign(predicted[i] - predicted[j])) ++correct;
    }
  }
  if (total == 0) throw std::invalid_argument("pairwise accuracy: no countable pairs");
  return static_cast<double>(correct) / static_cast<double>(total);
}

RankedList::RankedList(std::vector<RankedItem> items) : items_(std::move(items)) {
  std::sort(items_.begin(), items_.end(), [](const RankedItem& a, const RankedItem& b) {
    if (a.predicted != b.predicted) return a.predicted > b.predicted;
    return a.linear < b.linear;
  });
}

RankedList::RankedList(std::span<const int64_t> linear, std::span<const double> predicted,
                       std::span<const double> measured, std::span<const uint8_t> valid)
    : RankedList([&] {
        const size_t n = linear.size();
        if (predicted.size() != n || measured.size() != n || valid.size() != n) {
          throw std::invalid_argument("ranked list: length mismatch");
        }
        std::vector<RankedItem> items(n);
        for (size_t i = 0; i < n; ++i) items[i] = {linear[i], predicted[i], measured[i], valid[i] != 0};
        return items;
      }()) {}

double PrecisionAtN(const RankedList& ranked, int n) {
  CheckN(ranked, n);
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += ranked.items()[i].valid ? 1 : 0;
  return static_cast<double>(hits) / n;
}

double DcgAtN(const RankedList& ranked, int n) {
  CheckN(ranked, n);
  double dcg = 0;
  for (int i = 0; i < n; ++i) dcg += ranked.items()[i].measured / std::log2(static_cast<double>(i) + 2.0);
  return dcg;
}

double IdealDcgAtN(const RankedList& ranked, int n) {
  CheckN(ranked, n);
  std::vector<double> gains;
  gains.reserve(ranked.size());
  for (const RankedItem& item : ranked.items()) gains.push_back(item.measured);
  std::sort(gains.begin(), gains.end(), std::greater<>());
  double dcg = 0;
  for (int i = 0; i < n; ++i) dcg += gains[i] / std::log2(static_cast<double>(i) + 2.0);
  return dcg;
}

double NdcgAtN(const RankedList& ranked, int n) {
  double ideal = IdealDcgAtN(ranked, n);
  if (!(ideal > 0)) throw std::domain_error("nDCG undefined: ideal DCG is zero");
  return DcgAtN(ranked, n) / ideal;
}

double Quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  double pos = q * static_cast<double>(values.size() - 1);
  size_t lo = static_cast<size_t>(std::floor(pos));
  size_t hi = std::min(lo + 1, values.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

AggregateStatistics Summarize(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("cannot summarize zero runs");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  AggregateStatistics agg;
  agg.count = static_cast<int64_t>(sorted.size());
  agg.median = Quantile(sorted, 0.5);
  agg.q1 = Quantile(sorted, 0.25);
  agg.q3 = Quantile(sorted, 0.75);
  agg.iqr = agg.q3 - agg.q1;
  const double lo_fence = agg.q1 - 1.5 * agg.iqr;
  const double hi_fence = agg.q3 + 1.5 * agg.iqr;
  agg.whisker_low = agg.q1;
  agg.whisker_high = agg.q3;
  for (double x : sorted) {
    if (x < lo_fence || x > hi_fence) {
      agg.outliers.push_back(x);
    } else {
      agg.whisker_low = std::min(agg.whisker_low, x);
      agg.whisker_high = std::max(agg.whisker_high, x);
    }
  }
  return agg;
}

AggregateStatistics AggregateRuns(std::span<const RunStatistics> runs) {
  std::vector<double> trials;
  trials.reserve(runs.size());
  for (const RunStatistics& run : runs) trials.push_back(static_cast<double>(run.trials_to_best));
  return Summarize(trials);
}

}  // namespace hatune
