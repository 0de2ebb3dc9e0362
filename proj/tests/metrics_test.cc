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

#include <cmath>

#include "hatune/metrics.h"
#include "hatune/random.h"
#include "metric_oracles.h"

namespace hatune {
namespace {

using V = std::vector<double>;
using B = std::vector<uint8_t>;

RankedList Rank(const V& pred, const V& meas, const B& valid) {
  std::vector<int64_t> ids(pred.size());
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int64_t>(i);
  return RankedList(ids, pred, meas, valid);
}

TEST(PairwiseAccuracy, Examples) {
  EXPECT_DOUBLE_EQ(PairwiseAccuracy(V{1, 2, 3, 4}, V{1, 2, 3, 4}, B{1, 1, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(PairwiseAccuracy(V{5, 1, 2}, V{0, 1, 2}, B{0, 1, 1}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(PairwiseAccuracy(V{4, 3, 2, 1}, V{1, 2, 3, 4}, B{1, 1, 1, 1}), 0.0);
}

TEST(PairwiseAccuracy, IgnoresInvalidPairsAndFilters) {
  // Only the (0, 1) pair is valid-valid; pairs with item 2 are valid-invalid.
  const V meas{2, 1, 0, 0};
  const V pred{1, 2, 0, 9};
  const B valid{1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(PairwiseAccuracy(pred, meas, valid, PairFilter::kValidValid), 0.0);
  EXPECT_DOUBLE_EQ(PairwiseAccuracy(pred, meas, valid, PairFilter::kValidInvalid), 0.5);
  EXPECT_DOUBLE_EQ(PairwiseAccuracy(pred, meas, valid), 2.0 / 5.0);
  EXPECT_THROW(PairwiseAccuracy(V{1, 2}, V{0, 0}, B{0, 0}), std::invalid_argument);
  EXPECT_THROW(PairwiseAccuracy(V{1, 2}, V{1}, B{1, 1}), std::invalid_argument);
}

TEST(PairwiseAccuracy, TieRules) {
  // Predicted tie against a measured difference is wrong, double tie is right.
  EXPECT_DOUBLE_EQ(PairwiseAccuracy(V{1, 1}, V{1, 2}, B{1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(PairwiseAccuracy(V{1, 1}, V{2, 2}, B{1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(PairwiseAccuracy(V{1, 2}, V{2, 2}, B{1, 1}), 0.0);
}

TEST(RankedList, SortOrderAndTies) {
  const RankedList r({RankedItem{7, 1.0, 1, true}, RankedItem{3, 2.0, 1, true}, RankedItem{5, 1.0, 1, true}});
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r.items()[0].linear, 3);
  EXPECT_EQ(r.items()[1].linear, 5);
  EXPECT_EQ(r.items()[2].linear, 7);
}

TEST(Precision, Examples) {
  EXPECT_DOUBLE_EQ(PrecisionAtN(Rank(V{4, 3, 2, 1}, V{1, 1, 1, 1}, B{1, 1, 1, 1}), 4), 1.0);
  EXPECT_DOUBLE_EQ(PrecisionAtN(Rank(V{4, 3, 2, 1, 0}, V{1, 0, 1, 0, 1}, B{1, 0, 1, 0, 1}), 4), 0.5);
  EXPECT_DOUBLE_EQ(PrecisionAtN(Rank(V{4, 3, 2, 1}, V{0, 0, 1, 1}, B{0, 0, 1, 1}), 2), 0.0);
  const RankedList r = Rank(V{1, 2}, V{1, 1}, B{1, 1});
  EXPECT_THROW(PrecisionAtN(r, 0), std::out_of_range);
  EXPECT_THROW(PrecisionAtN(r, 3), std::out_of_range);
}

TEST(Ndcg, HandComputedExample) {
  // Model order (2, 3, 1) over measured scores {3, 2, 1}.
  const RankedList r = Rank(V{2, 3, 1}, V{3, 2, 1}, B{1, 1, 1});
  const double dcg = 2.0 / std::log2(2.0) + 3.0 / std::log2(3.0) + 1.0 / std::log2(4.0);
  const double idcg = 3.0 / std::log2(2.0) + 2.0 / std::log2(3.0) + 1.0 / std::log2(4.0);
  EXPECT_NEAR(DcgAtN(r, 3), 4.3928, 1e-4);
  EXPECT_NEAR(IdealDcgAtN(r, 3), 4.7619, 1e-4);
  EXPECT_NEAR(NdcgAtN(r, 3), dcg / idcg, 1e-12);
  EXPECT_NEAR(NdcgAtN(r, 3), 0.9225, 1e-4);
}

TEST(Ndcg, PerfectAndUndefined) {
  EXPECT_DOUBLE_EQ(NdcgAtN(Rank(V{3, 2, 1}, V{3, 2, 1}, B{1, 1, 1}), 3), 1.0);
  EXPECT_THROW(NdcgAtN(Rank(V{3, 2}, V{0, 0}, B{0, 0}), 2), std::domain_error);
}

TEST(Ndcg, InvalidDisplacingValidLowersScore) {
  // Valid items 4, 3 and an invalid one; placing the invalid inside the top 2 must cost.
  const V meas{4, 3, 0};
  const B valid{1, 1, 0};
  const double clean = NdcgAtN(Rank(V{3, 2, 1}, meas, valid), 2);
  const double displaced = NdcgAtN(Rank(V{3, 1, 2}, meas, valid), 2);
  EXPECT_LT(displaced, clean);
}

TEST(Metrics, AgreeWithBruteForce) {
  Random rng(2024);
  for (int t = 0; t < 500; ++t) {
    const oracle::Instance in = oracle::RandomInstance(&rng);
    const RankedList r(in.linear, in.predicted, in.measured, in.valid);
    for (PairFilter f : {PairFilter::kAllCountable, PairFilter::kValidInvalid, PairFilter::kValidValid}) {
      const double want = oracle::PairwiseAccuracy(in, f);
      if (std::isnan(want)) {
        EXPECT_THROW(PairwiseAccuracy(in.predicted, in.measured, in.valid, f), std::invalid_argument);
      } else {
        ASSERT_NEAR(PairwiseAccuracy(in.predicted, in.measured, in.valid, f), want, 1e-12);
      }
    }
    for (int n = 1; n <= static_cast<int>(in.linear.size()); ++n) {
      ASSERT_NEAR(PrecisionAtN(r, n), oracle::Precision(in, n), 1e-12);
      ASSERT_NEAR(NdcgAtN(r, n), oracle::Ndcg(in, n), 1e-12);
    }
  }
}

/*! \brief Metrics depend on the prediction order only. */
TEST(Metrics, InvariantUnderMonotoneTransform) {
  Random rng(7);
  for (int t = 0; t < 300; ++t) {
    const oracle::Instance in = oracle::RandomInstance(&rng);
    const double scale = 0.1 + 5 * rng.UniformReal();
    const double shift = 10 * rng.UniformReal() - 5;
    V mapped;
    for (double p : in.predicted) mapped.push_back(std::exp(scale * p) + shift);
    const RankedList a(in.linear, in.predicted, in.measured, in.valid);
    const RankedList b(in.linear, mapped, in.measured, in.valid);
    EXPECT_EQ(PairwiseAccuracy(in.predicted, in.measured, in.valid), PairwiseAccuracy(mapped, in.measured, in.valid));
    for (int n = 1; n <= static_cast<int>(in.linear.size()); ++n) {
      EXPECT_EQ(PrecisionAtN(a, n), PrecisionAtN(b, n));
      EXPECT_EQ(NdcgAtN(a, n), NdcgAtN(b, n));
    }
  }
}

TEST(Metrics, NegatedPredictionsComplementWithoutTies) {
  Random rng(8);
  int checked = 0;
  for (int t = 0; t < 300; ++t) {
    const int n = 2 + static_cast<int>(rng.UniformIndex(7));
    V pred, meas, neg;
    B valid;
    for (int i = 0; i < n; ++i) {
      // Distinct measured values and distinct predictions.
      valid.push_back(i == 0 || rng.UniformReal() < 0.8);
      meas.push_back(valid.back() ? 1.0 + i : 0.0);
      pred.push_back(rng.UniformReal());
      neg.push_back(-pred.back());
    }
    if (std::count(valid.begin(), valid.end(), 0) > 1) continue;
    EXPECT_NEAR(PairwiseAccuracy(pred, meas, valid) + PairwiseAccuracy(neg, meas, valid), 1.0, 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(Metrics, NdcgOneIffTopNMeasuredDescending) {
  Random rng(10);
  for (int t = 0; t < 300; ++t) {
    const oracle::Instance in = oracle::RandomInstance(&rng);
    const RankedList r(in.linear, in.predicted, in.measured, in.valid);
    for (int n = 1; n <= static_cast<int>(r.size()); ++n) {
      // Top-n holds the n largest measured scores in descending order (up to ties).
      V top, all = in.measured;
      for (int i = 0; i < n; ++i) top.push_back(r.items()[i].measured);
      std::sort(all.rbegin(), all.rend());
      const bool ideal = std::equal(top.begin(), top.end(), all.begin());
      EXPECT_EQ(NdcgAtN(r, n) == 1.0, ideal);
    }
  }
}

TEST(Metrics, PrecisionDropsWhenInvalidSwappedIn) {
  Random rng(12);
  for (int t = 0; t < 300; ++t) {
    oracle::Instance in = oracle::RandomInstance(&rng);
    const RankedList r(in.linear, in.predicted, in.measured, in.valid);
    const int n = 1 + static_cast<int>(rng.UniformIndex(static_cast<int64_t>(r.size())));
    // Swap predictions of a valid top-n item and an invalid item below n.
    int hi = -1, lo = -1;
    for (int i = 0; i < n; ++i) if (r.items()[i].valid) hi = i;
    for (int i = n; i < static_cast<int>(r.size()); ++i) if (!r.items()[i].valid) lo = i;
    if (hi < 0 || lo < 0) continue;
    std::vector<RankedItem> items = r.items();
    std::swap(items[hi].predicted, items[lo].predicted);
    std::swap(items[hi].linear, items[lo].linear);
    const RankedList swapped(items);
    EXPECT_LE(PrecisionAtN(swapped, n), PrecisionAtN(r, n));
  }
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(Quantile({100, 200, 300, 400}, 0.5), 250);
  EXPECT_DOUBLE_EQ(Quantile({100, 200, 300, 400}, 0.25), 175);
  EXPECT_DOUBLE_EQ(Quantile({100, 200, 300, 400}, 0.75), 325);
  EXPECT_DOUBLE_EQ(Quantile({400, 100, 300, 200}, 0.0), 100);
  EXPECT_DOUBLE_EQ(Quantile({400, 100, 300, 200}, 1.0), 400);
  EXPECT_DOUBLE_EQ(Quantile({5}, 0.3), 5);
  EXPECT_THROW(Quantile({}, 0.5), std::invalid_argument);
}

RunStatistics StatsWith(int64_t t) {
  RunStatistics r;
  r.trials_to_best = t;
  return r;
}

TEST(AggregateRuns, Examples) {
  const std::vector<RunStatistics> four = {StatsWith(100), StatsWith(200), StatsWith(300), StatsWith(400)};
  const AggregateStatistics a = AggregateRuns(four);
  EXPECT_DOUBLE_EQ(a.median, 250);
  EXPECT_DOUBLE_EQ(a.q1, 175);
  EXPECT_DOUBLE_EQ(a.q3, 325);
  EXPECT_DOUBLE_EQ(a.iqr, 150);
  EXPECT_EQ(a.count, 4);
  EXPECT_TRUE(a.outliers.empty());

  const std::vector<RunStatistics> same = {StatsWith(7), StatsWith(7), StatsWith(7)};
  EXPECT_DOUBLE_EQ(AggregateRuns(same).iqr, 0);
  const std::vector<RunStatistics> one = {StatsWith(42)};
  EXPECT_DOUBLE_EQ(AggregateRuns(one).median, 42);
  EXPECT_DOUBLE_EQ(AggregateRuns(one).iqr, 0);
  EXPECT_THROW(AggregateRuns(std::vector<RunStatistics>{}), std::invalid_argument);
}

TEST(AggregateRuns, OutliersAndWhiskers) {
  const std::vector<double> s = {10, 11, 12, 13, 14, 100};
  const AggregateStatistics a = Summarize(s);
  ASSERT_EQ(a.outliers, (std::vector<double>{100}));
  EXPECT_DOUBLE_EQ(a.whisker_low, 10);
  EXPECT_DOUBLE_EQ(a.whisker_high, 14);
  EXPECT_LE(a.q1, a.median);
  EXPECT_LE(a.median, a.q3);
}

TEST(AggregateRuns, QuartileOrderProperty) {
  Random rng(3);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> s(1 + rng.UniformIndex(30));
    for (double& v : s) v = static_cast<double>(rng.UniformIndex(751));
    const AggregateStatistics a = Summarize(s);
    ASSERT_LE(a.q1, a.median);
    ASSERT_LE(a.median, a.q3);
    ASSERT_DOUBLE_EQ(a.iqr, a.q3 - a.q1);
    ASSERT_LE(a.whisker_low, a.q1 + 1e-9);
    ASSERT_GE(a.whisker_high, a.q3 - 1e-9);
    for (double o : a.outliers) ASSERT_TRUE(o < a.q1 - 1.5 * a.iqr || o > a.q3 + 1.5 * a.iqr);
  }
}

}  // namespace
}  // namespace hatune
