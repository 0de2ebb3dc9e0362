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
 * \file hatune/search_space.h
 * \brief Knobs, the Cartesian-grid search space and grid adjacency.
 *
 * A search space is the Cartesian product of knob value lists. Every
 * configuration has grid coordinates (one value index per knob) and a
 * mixed-radix linear index with knob 0 as the most significant digit.
 * Adjacency is defined on value-index coordinates, so a Split knob with
 * values 1, 2, 4 has unit steps between consecutive values.
 */
#ifndef HATUNE_SEARCH_SPACE_H_
#define HATUNE_SEARCH_SPACE_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace hatune {

enum class KnobKind { kSplit, kOtherOption };

const char* KnobKindName(KnobKind kind);
KnobKind ParseKnobKind(const std::string& name);

struct Knob {
  std::string name;
  KnobKind kind = KnobKind::kSplit;
  std::vector<int64_t> values;
};

/*! \brief Grid position of a configuration. */
struct ConfigIndex {
  std::vector<int32_t> coords;
  int64_t linear = 0;

  bool operator==(const ConfigIndex& other) const { return linear == other.linear && coords == other.coords; }
};

/*! \brief Resolved knob values, one per knob. */
struct Configuration {
  std::vector<int64_t> values;
};

class SearchSpace {
 public:
  SearchSpace() = default;
  /*! \brief Validates the knobs; throws std::invalid_argument on violation. */
  SearchSpace(std::vector<Knob> knobs, std::string workload_id);

  int64_t size() const { return size_; }
  size_t num_knobs() const { return knobs_.size(); }
  const std::vector<Knob>& knobs() const { return knobs_; }
  const Knob& knob(size_t k) const { return knobs_.at(k); }
  int32_t cardinality(size_t k) const { return static_cast<int32_t>(knobs_[k].values.size()); }
  int64_t stride(size_t k) const { return strides_[k]; }
  const std::string& workload_id() const { return workload_id_; }
  /*! \brief Index of the knob with this name, or -1. */
  int FindKnob(const std::string& name) const;

  ConfigIndex ToCoords(int64_t linear) const;
  int64_t FromCoords(std::span<const int32_t> coords) const;
  /*! \brief Single coordinate of a linear index without materializing all of them. */
  int32_t CoordOf(int64_t linear, size_t k) const { return static_cast<int32_t>((linear / strides_[k]) % knobs_[k].values.size()); }

  Configuration Resolve(const ConfigIndex& index) const;
  Configuration Resolve(int64_t linear) const { return Resolve(ToCoords(linear)); }
  /*! \brief Inverse of Resolve; throws if a value is not on its knob's menu. */
  ConfigIndex Locate(const Configuration& config) const;

  std::vector<ConfigIndex> Neighbors(const ConfigIndex& p) const;
  /*! \brief Linear indices of all grid neighbours, ascending knob order, minus before plus. */
  void NeighborsLinear(int64_t linear, std::vector<int64_t>* out) const;

  /*! \brief FNV-1a over the canonical knob description; keys ground-truth files. */
  uint64_t Hash() const;

 private:
  void CheckLinear(int64_t linear) const;

  std::vector<Knob> knobs_;
  std::vector<int64_t> strides_;
  std::string workload_id_;
  int64_t size_ = 0;
};

SearchSpace BuildSpace(std::vector<Knob> knobs, std::string workload_id = "");

/*! \brief L1 distance between grid coordinates. */
int64_t ManhattanDistance(const ConfigIndex& a, const ConfigIndex& b);
int64_t ManhattanDistance(std::span<const int32_t> a, std::span<const int32_t> b);

/*! \brief Connected-component statistics of the valid-valid grid graph. */
struct ComponentStats {
  int64_t component_count = 0;
  int64_t largest = 0;
  /*! \brief component size -> number of components with that size */
  std::map<int64_t, int64_t> size_histogram;
};

struct GraphSummary {
  ComponentStats observed;
  int64_t valid_count = 0;
  /*! \brief Largest-component size of each label-shuffled control, in shuffle order. */
  std::vector<int64_t> shuffled_largest;
  double shuffled_p10 = 0;
  double shuffled_p50 = 0;
  double shuffled_p90 = 0;
};

ComponentStats ValidComponents(const SearchSpace& space, std::span<const uint8_t> valid);

/*!
 * \brief Clusters valid configurations over grid adjacency and compares the
 *  result with `shuffles` random permutations of the validity labels.
 */
GraphSummary ValidityGraph(const SearchSpace& space, std::span<const uint8_t> valid, int shuffles = 100,
                           uint64_t seed = 0);

}  // namespace hatune

#endif  // HATUNE_SEARCH_SPACE_H_
