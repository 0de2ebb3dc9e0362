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

#include "hatune/surrogate.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "hatune/random.h"
#include "json.hpp"

namespace hatune {

FeatureVector Featurize(const Configuration& config, const SearchSpace& space) {
  return Featurize(space.Locate(config).linear, space);
}

FeatureVector Featurize(int64_t linear, const SearchSpace& space) {
  if (linear < 0 || linear >= space.size()) throw std::out_of_range("configuration not in space");
  FeatureVector fv(space.num_knobs());
  for (size_t k = 0; k < space.num_knobs(); ++k) {
    const Knob& knob = space.knob(k);
    const int32_t c = space.CoordOf(linear, k);
    fv[k] = knob.kind == KnobKind::kSplit ? std::log2(static_cast<double>(knob.values[c])) : static_cast<double>(c);
  }
  return fv;
}

FeatureMatrix FeaturizeAll(const SearchSpace& space, std::span<const int64_t> linear) {
  FeatureMatrix m(static_cast<Eigen::Index>(linear.size()), static_cast<Eigen::Index>(space.num_knobs()));
  for (size_t i = 0; i < linear.size(); ++i) m.row(i) = Featurize(linear[i], space).transpose();
  return m;
}

TrainingSet BuildTrainingSet(const SearchSpace& space, std::span<const int64_t> linear,
                             std::span<const MeasurementResult> results) {
  if (linear.size() != results.size()) throw std::invalid_argument("training set: length mismatch");
  TrainingSet ts;
  ts.linear.assign(linear.begin(), linear.end());
  ts.features = FeaturizeAll(space, linear);
  ts.targets = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(linear.size()));
  ts.valid.resize(linear.size());
  double best = 0;
  for (const MeasurementResult& r : results) {
    if (r.valid) best = std::max(best, r.gflops);
  }
  for (size_t i = 0; i < results.size(); ++i) {
    ts.valid[i] = results[i].valid ? 1 : 0;
    if (results[i].valid) ts.targets[i] = results[i].gflops / best;
  }
  return ts;
}

namespace {

/*! \brief Per-feature sorted distinct values and each row's bin. */
struct Binning {
  std::vector<std::vector<double>> values;
  std::vector<std::vector<int32_t>> bin;  // [feature][row]

  explicit Binning(const FeatureMatrix& x) {
    const Eigen::Index n = x.rows(), f = x.cols();
    values.resize(f);
    bin.resize(f);
    for (Eigen::Index j = 0; j < f; ++j) {
      std::vector<double>& v = values[j];
      v.assign(n, 0);
      for (Eigen::Index i = 0; i < n; ++i) v[i] = x(i, j);
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      bin[j].resize(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        bin[j][i] = static_cast<int32_t>(std::lower_bound(v.begin(), v.end(), x(i, j)) - v.begin());
      }
    }
  }
};

}  // namespace

void GradientBoostedTrees::Fit(const FeatureMatrix& features, const Eigen::VectorXd& targets, uint64_t seed) {
  const Eigen::Index n = features.rows();
  if (n == 0) throw std::invalid_argument("cannot fit on an empty training set");
  if (targets.size() != n) throw std::invalid_argument("feature and target row counts differ");
  if (params_.n_trees < 0 || params_.max_depth < 0 || params_.min_samples_leaf < 1 || params_.learning_rate <= 0 ||
      params_.subsample <= 0 || params_.subsample > 1) {
    throw std::invalid_argument("invalid boosting hyperparameters");
  }

  num_features_ = features.cols();
  trees_.clear();
  training_mse_.clear();
  base_score_ = targets.mean();
  fitted_ = true;

  const Binning binning(features);
  Eigen::VectorXd prediction = Eigen::VectorXd::Constant(n, base_score_);
  Eigen::VectorXd residual = targets - prediction;
  training_mse_.push_back(residual.squaredNorm() / static_cast<double>(n));

  Random rng(seed);
  std::vector<int64_t> all_rows(n);
  for (Eigen::Index i = 0; i < n; ++i) all_rows[i] = i;
  std::vector<double> bin_sum;
  std::vector<int64_t> bin_count;

  for (int round = 0; round < params_.n_trees; ++round) {
    std::vector<int64_t> rows = all_rows;
    if (params_.subsample < 1.0) {
      const int64_t take = std::max<int64_t>(1, static_cast<int64_t>(std::llround(params_.subsample * n)));
      rows = rng.SampleWithoutReplacement(n, take);
      std::sort(rows.begin(), rows.end());
    }

    Tree tree;
    // Grows the subtree for `node_rows`, returning its node index.
    std::function<int32_t(std::vector<int64_t>&, int)> grow = [&](std::vector<int64_t>& node_rows,
                                                                  int depth) -> int32_t {
      const int32_t id = static_cast<int32_t>(tree.size());
      tree.emplace_back();
      double total = 0;
      for (int64_t r : node_rows) total += residual[r];
      const int64_t count = static_cast<int64_t>(node_rows.size());
      tree[id].value = params_.learning_rate * total / static_cast<double>(count);
      if (depth >= params_.max_depth || count < 2 * params_.min_samples_leaf) return id;

      const double parent_score = total * total / static_cast<double>(count);
      double best_gain = 1e-12;
      int32_t best_feature = -1;
      int32_t best_bin = -1;
      for (Eigen::Index j = 0; j < num_features_; ++j) {
        const size_t bins = binning.values[j].size();
        if (bins < 2) continue;
        bin_sum.assign(bins, 0.0);
        bin_count.assign(bins, 0);
        for (int64_t r : node_rows) {
          bin_sum[binning.bin[j][r]] += residual[r];
          ++bin_count[binning.bin[j][r]];
        }
        double left_sum = 0;
        int64_t left_count = 0;
        for (size_t b = 0; b + 1 < bins; ++b) {
          left_sum += bin_sum[b];
          left_count += bin_count[b];
          if (bin_count[b] == 0) continue;  // same partition as the previous threshold
          const int64_t right_count = count - left_count;
          if (left_count < params_.min_samples_leaf || right_count < params_.min_samples_leaf) continue;
          const double right_sum = total - left_sum;
          const double gain = left_sum * left_sum / static_cast<double>(left_count) +
                              right_sum * right_sum / static_cast<double>(right_count) - parent_score;
          if (gain > best_gain) {
            best_gain = gain;
            best_feature = static_cast<int32_t>(j);
            best_bin = static_cast<int32_t>(b);
          }
        }
      }
      if (best_feature < 0) return id;

      // Threshold halfway to the next value present in this node.
      const auto& values = binning.values[best_feature];
      int32_t next_bin = std::numeric_limits<int32_t>::max();
      for (int64_t r : node_rows) {
        int32_t b = binning.bin[best_feature][r];
        if (b > best_bin) next_bin = std::min(next_bin, b);
      }
      const double threshold = 0.5 * (values[best_bin] + values[next_bin]);

      std::vector<int64_t> left_rows, right_rows;
      for (int64_t r : node_rows) {
        (binning.bin[best_feature][r] <= best_bin ? left_rows : right_rows).push_back(r);
      }
      node_rows.clear();
      node_rows.shrink_to_fit();
      const int32_t left = grow(left_rows, depth + 1);
      const int32_t right = grow(right_rows, depth + 1);
      tree[id].feature = best_feature;
      tree[id].threshold = threshold;
      tree[id].left = left;
      tree[id].right = right;
      return id;
    };
    grow(rows, 0);

    for (Eigen::Index i = 0; i < n; ++i) prediction[i] += Evaluate(tree, features.row(i).data());
    residual = targets - prediction;
    const double mse = residual.squaredNorm() / static_cast<double>(n);
    if (params_.subsample == 1.0 && mse > training_mse_.back() * (1 + 1e-12) + 1e-300) {
      throw std::logic_error("boosting round increased the training error");
    }
    training_mse_.push_back(mse);
    trees_.push_back(std::move(tree));
  }
}

double GradientBoostedTrees::Evaluate(const Tree& tree, const double* x) {
  int32_t node = 0;
  while (tree[node].feature >= 0) node = x[tree[node].feature] <= tree[node].threshold ? tree[node].left : tree[node].right;
  return tree[node].value;
}

double GradientBoostedTrees::Predict(const Eigen::Ref<const Eigen::VectorXd>& features) const {
  if (!fitted_) return 0.0;
  if (features.size() != num_features_) throw std::invalid_argument("feature length does not match the model");
  const double* x = features.data();
  double sum = base_score_;
  for (const Tree& tree : trees_) sum += Evaluate(tree, x);
  return sum;
}

Eigen::VectorXd GradientBoostedTrees::PredictBatch(const FeatureMatrix& features) const {
  Eigen::VectorXd out(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) out[i] = Predict(features.row(i).transpose());
  return out;
}

std::string GradientBoostedTrees::ToJson() const {
  using nlohmann::json;
  std::function<json(const Tree&, int32_t)> node_json = [&](const Tree& tree, int32_t id) -> json {
    const Node& node = tree[id];
    if (node.feature < 0) return {{"leaf", node.value}};
    return {{"feature", node.feature},
            {"threshold", node.threshold},
            {"value", node.value},
            {"left", node_json(tree, node.left)},
            {"right", node_json(tree, node.right)}};
  };
  json trees = json::array();
  for (const Tree& tree : trees_) trees.push_back(node_json(tree, 0));
  json doc = {{"format", "hatune-gbt"},
              {"version", 1},
              {"params",
               {{"n_trees", params_.n_trees},
                {"max_depth", params_.max_depth},
                {"learning_rate", params_.learning_rate},
                {"min_samples_leaf", params_.min_samples_leaf},
                {"subsample", params_.subsample}}},
              {"fitted", fitted_},
              {"num_features", num_features_},
              {"base_score", base_score_},
              {"trees", trees}};
  return doc.dump();
}

GradientBoostedTrees GradientBoostedTrees::FromJson(const std::string& text) {
  using nlohmann::json;
  const json doc = json::parse(text);
  if (doc.value("format", "") != "hatune-gbt" || doc.value("version", 0) != 1) {
    throw std::runtime_error("not a version-1 boosted-tree model");
  }
  const json& p = doc.at("params");
  BoostingParams params{p.at("n_trees").get<int>(), p.at("max_depth").get<int>(), p.at("learning_rate").get<double>(),
                        p.at("min_samples_leaf").get<int>(), p.at("subsample").get<double>()};
  GradientBoostedTrees model(params);
  model.fitted_ = doc.at("fitted").get<bool>();
  model.num_features_ = doc.at("num_features").get<int64_t>();
  model.base_score_ = doc.at("base_score").get<double>();
  std::function<int32_t(Tree&, const json&)> read = [&](Tree& tree, const json& j) -> int32_t {
    const int32_t id = static_cast<int32_t>(tree.size());
    tree.emplace_back();
    if (j.contains("leaf")) {
      tree[id].value = j.at("leaf").get<double>();
      return id;
    }
    const int32_t feature = j.at("feature").get<int32_t>();
    if (feature < 0 || feature >= model.num_features_) throw std::runtime_error("tree split on unknown feature");
    const int32_t left = read(tree, j.at("left"));
    const int32_t right = read(tree, j.at("right"));
    tree[id].feature = feature;
    tree[id].threshold = j.at("threshold").get<double>();
    tree[id].value = j.at("value").get<double>();
    tree[id].left = left;
    tree[id].right = right;
    return id;
  };
  for (const json& t : doc.at("trees")) {
    Tree tree;
    read(tree, t);
    model.trees_.push_back(std::move(tree));
  }
  return model;
}

}  // namespace hatune
