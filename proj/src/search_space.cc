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

#include "hatune/search_space.h"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "hatune/metrics.h"
#include "hatune/random.h"

namespace hatune {

const char* KnobKindName(KnobKind kind) { return kind == KnobKind::kSplit ? "Split" : "OtherOption"; }

KnobKind ParseKnobKind(const std::string& name) {
  if (name == "Split") return KnobKind::kSplit;
  if (name == "OtherOption") return KnobKind::kOtherOption;
  throw std::invalid_argument("unknown knob kind '" + name + "'");
}

SearchSpace::SearchSpace(std::vector<Knob> knobs, std::string workload_id)
    : knobs_(std::move(knobs)), workload_id_(std::move(workload_id)) {
  if (knobs_.empty()) throw std::invalid_argument("search space needs at least one knob");
  for (const Knob& knob : knobs_) {
    if (knob.values.empty()) throw std::invalid_argument("knob '" + knob.name + "' has no values");
    std::set<int64_t> unique(knob.values.begin(), knob.values.end());
    if (unique.size() != knob.values.size()) {
      throw std::invalid_argument("knob '" + knob.name + "' has duplicate values");
    }
    if (knob.kind == KnobKind::kSplit) {
      if (!std::is_sorted(knob.values.begin(), knob.values.end()) || knob.values.front() < 1) {
        throw std::invalid_argument("split knob '" + knob.name + "' must list ascending positive factors");
      }
    }
  }
  strides_.assign(knobs_.size(), 1);
  size_ = 1;
  for (size_t k = knobs_.size(); k-- > 0;) {
    strides_[k] = size_;
    size_ *= static_cast<int64_t>(knobs_[k].values.size());
  }
}

SearchSpace BuildSpace(std::vector<Knob> knobs, std::string workload_id) {
  return SearchSpace(std::move(knobs), std::move(workload_id));
}

int SearchSpace::FindKnob(const std::string& name) const {
  for (size_t k = 0; k < knobs_.size(); ++k) {
    if (knobs_[k].name == name) return static_cast<int>(k);
  }
  return -1;
}

void SearchSpace::CheckLinear(int64_t linear) const {
  if (linear < 0 || linear >= size_) {
    throw std::out_of_range("config index " + std::to_string(linear) + " outside space of size " +
                            std::to_string(size_));
  }
}

ConfigIndex SearchSpace::ToCoords(int64_t linear) const {
  CheckLinear(linear);
  ConfigIndex index;
  index.linear = linear;
  index.coords.resize(knobs_.size());
  for (size_t k = 0; k < knobs_.size(); ++k) index.coords[k] = CoordOf(linear, k);
  return index;
}

int64_t SearchSpace::FromCoords(std::span<const int32_t> coords) const {
  if (coords.size() != knobs_.size()) throw std::invalid_argument("coordinate count does not match knob count");
  int64_t linear = 0;
  for (size_t k = 0; k < coords.size(); ++k) {
    if (coords[k] < 0 || coords[k] >= cardinality(k)) {
      throw std::out_of_range("coordinate " + std::to_string(coords[k]) + " out of range for knob '" +
                              knobs_[k].name + "'");
    }
    linear += coords[k] * strides_[k];
  }
  return linear;
}

Configuration SearchSpace::Resolve(const ConfigIndex& index) const {
  if (index.coords.size() != knobs_.size()) throw std::invalid_argument("coordinate count does not match knob count");
  Configuration config;
  config.values.resize(knobs_.size());
  for (size_t k = 0; k < knobs_.size(); ++k) config.values[k] = knobs_[k].values.at(index.coords[k]);
  return config;
}

ConfigIndex SearchSpace::Locate(const Configuration& config) const {
  if (config.values.size() != knobs_.size()) throw std::invalid_argument("configuration has wrong knob count");
  ConfigIndex index;
  index.coords.resize(knobs_.size());
  for (size_t k = 0; k < knobs_.size(); ++k) {
    const auto& values = knobs_[k].values;
    auto it = std::find(values.begin(), values.end(), config.values[k]);
    if (it == values.end()) {
      throw std::invalid_argument("value " + std::to_string(config.values[k]) + " is not a choice of knob '" +
                                  knobs_[k].name + "'");
    }
    index.coords[k] = static_cast<int32_t>(it - values.begin());
  }
  index.linear = FromCoords(index.coords);
  return index;
}

std::vector<ConfigIndex> SearchSpace::Neighbors(const ConfigIndex& p) const {
  std::vector<int64_t> linear;
  NeighborsLinear(FromCoords(p.coords), &linear);
  std::vector<ConfigIndex> out;
  out.reserve(linear.size());
  for (int64_t q : linear) out.push_back(ToCoords(q));
  return out;
}

void SearchSpace::NeighborsLinear(int64_t linear, std::vector<int64_t>* out) const {
  CheckLinear(linear);
  out->clear();
  for (size_t k = 0; k < knobs_.size(); ++k) {
    int32_t c = CoordOf(linear, k);
    if (c > 0) out->push_back(linear - strides_[k]);
    if (c + 1 < cardinality(k)) out->push_back(linear + strides_[k]);
  }
}

uint64_t SearchSpace::Hash() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  mix(workload_id_);
  for (const Knob& knob : knobs_) {
    mix(knob.name);
    mix(KnobKindName(knob.kind));
    for (int64_t v : knob.values) mix(std::to_string(v));
  }
  return h;
}

int64_t ManhattanDistance(std::span<const int32_t> a, std::span<const int32_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("Manhattan distance of mismatched coordinate lengths");
  int64_t d = 0;
  for (size_t k = 0; k < a.size(); ++k) d += std::abs(static_cast<int64_t>(a[k]) - b[k]);
  return d;
}

int64_t ManhattanDistance(const ConfigIndex& a, const ConfigIndex& b) { return ManhattanDistance(a.coords, b.coords); }

ComponentStats ValidComponents(const SearchSpace& space, std::span<const uint8_t> valid) {
  if (static_cast<int64_t>(valid.size()) != space.size()) {
    throw std::invalid_argument("validity labels do not cover the search space");
  }
  ComponentStats stats;
  std::vector<uint8_t> seen(valid.size(), 0);
  std::vector<int64_t> stack, neighbors;
  for (int64_t start = 0; start < space.size(); ++start) {
    if (!valid[start] || seen[start]) continue;
    int64_t count = 0;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      int64_t p = stack.back();
      stack.pop_back();
      ++count;
      space.NeighborsLinear(p, &neighbors);
      for (int64_t q : neighbors) {
        if (valid[q] && !seen[q]) {
          seen[q] = 1;
          stack.push_back(q);
        }
      }
    }
    ++stats.component_count;
    ++stats.size_histogram[count];
    stats.largest = std::max(stats.largest, count);
  }
  return stats;
}

GraphSummary ValidityGraph(const SearchSpace& space, std::span<const uint8_t> valid, int shuffles, uint64_t seed) {
  GraphSummary summary;
  summary.observed = ValidComponents(space, valid);
  summary.valid_count = std::count_if(valid.begin(), valid.end(), [](uint8_t v) { return v != 0; });
  if (shuffles <= 0) return summary;

  Random rng(seed);
  std::vector<uint8_t> labels(valid.begin(), valid.end());
  std::vector<double> largest;
  for (int s = 0; s < shuffles; ++s) {
    rng.Shuffle(&labels);
    int64_t l = ValidComponents(space, labels).largest;
    summary.shuffled_largest.push_back(l);
    largest.push_back(static_cast<double>(l));
  }
  summary.shuffled_p10 = Quantile(largest, 0.10);
  summary.shuffled_p50 = Quantile(largest, 0.50);
  summary.shuffled_p90 = Quantile(largest, 0.90);
  return summary;
}

}  // namespace hatune
