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
 * \file hatune/surrogate.h
 * \brief Knob featurization and the gradient-boosted regression-tree
 *  performance model.
 *
 * Features are one entry per knob: log2 of the value for Split knobs and
 * the value index for OtherOption knobs. Targets are throughput normalized
 * by the best throughput in the training data; invalid configurations are
 * encoded with target 0.
 */
#ifndef HATUNE_SURROGATE_H_
#define HATUNE_SURROGATE_H_

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hatune/oracle.h"
#include "hatune/search_space.h"

namespace hatune {

using FeatureVector = Eigen::VectorXd;
/*! \brief Row-per-configuration feature matrix. */
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

FeatureVector Featurize(const Configuration& config, const SearchSpace& space);
FeatureVector Featurize(int64_t linear, const SearchSpace& space);
FeatureMatrix FeaturizeAll(const SearchSpace& space, std::span<const int64_t> linear);

struct TrainingSet {
  FeatureMatrix features;
  Eigen::VectorXd targets;
  std::vector<int64_t> linear;
  std::vector<uint8_t> valid;

  int64_t rows() const { return static_cast<int64_t>(linear.size()); }
};

/*!
 * \brief Builds the penalty-encoded training set: invalid rows get 0, valid
 *  rows gflops / max gflops over the valid rows.
 */
TrainingSet BuildTrainingSet(const SearchSpace& space, std::span<const int64_t> linear,
                             std::span<const MeasurementResult> results);

struct BoostingParams {
  int n_trees = 50;
  int max_depth = 6;
  double learning_rate = 0.1;
  int min_samples_leaf = 2;
  /*! \brief Row fraction drawn (seeded) per tree; 1 disables sampling. */
  double subsample = 1.0;
};

class GradientBoostedTrees {
 public:
  GradientBoostedTrees() = default;
  explicit GradientBoostedTrees(BoostingParams params) : params_(params) {}

  /*!
   * \brief Squared-error boosting from a mean-target base score. Splits are
   *  chosen by largest variance reduction; ties keep the lowest feature
   *  index, then the lowest threshold. Throws std::invalid_argument on an
   *  empty training set.
   */
  void Fit(const FeatureMatrix& features, const Eigen::VectorXd& targets, uint64_t seed = 0);
  void Fit(const TrainingSet& data, uint64_t seed = 0) { Fit(data.features, data.targets, seed); }

  /*! \brief 0 for an untrained model. Throws on a feature length mismatch. */
  double Predict(const Eigen::Ref<const Eigen::VectorXd>& features) const;
  Eigen::VectorXd PredictBatch(const FeatureMatrix& features) const;

  bool fitted() const { return fitted_; }
  const BoostingParams& params() const { return params_; }
  size_t num_trees() const { return trees_.size(); }
  /*! \brief Training MSE before the first tree and after every round. */
  const std::vector<double>& training_mse() const { return training_mse_; }

  std::string ToJson() const;
  static GradientBoostedTrees FromJson(const std::string& text);

 private:
  struct Node {
    int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0;  // go left when x[feature] <= threshold
    int32_t left = -1;
    int32_t right = -1;
    double value = 0;
  };
  using Tree = std::vector<Node>;

  static double Evaluate(const Tree& tree, const double* x);

  BoostingParams params_;
  bool fitted_ = false;
  int64_t num_features_ = 0;
  double base_score_ = 0;
  std::vector<Tree> trees_;
  std::vector<double> training_mse_;
};

}  // namespace hatune

#endif  // HATUNE_SURROGATE_H_
