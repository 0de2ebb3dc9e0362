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

#include "hatune/sampler.h"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "hatune/random.h"
#include "json.hpp"

namespace hatune {

namespace {

enum : uint8_t { kUnseen = 0, kCandidate = 1, kEvaluated = 2 };

/*! \brief Random draws of unseen configurations; falls back to a scan once the space is mostly seen. */
class UnseenPicker {
 public:
  UnseenPicker(std::vector<uint8_t>* state, Random* rng) : state_(*state), rng_(*rng) {}

  /*! \brief -1 when nothing is unseen. */
  int64_t Pick(int64_t unseen) {
    if (unseen <= 0) return -1;
    const int64_t n = static_cast<int64_t>(state_.size());
    for (int attempt = 0; attempt < 32; ++attempt) {
      int64_t x = rng_.UniformIndex(n);
      if (state_[x] == kUnseen) return x;
    }
    // Uniform over the remaining unseen points.
    int64_t target = rng_.UniformIndex(unseen);
    for (int64_t x = 0; x < n; ++x) {
      if (state_[x] == kUnseen && target-- == 0) return x;
    }
    return -1;
  }

 private:
  std::vector<uint8_t>& state_;
  Random& rng_;
};

}  // namespace

PresampleSet Presample(int64_t n_samples, int n_parallel, const SearchSpace& space, const ValidityCheck& check,
                       uint64_t seed) {
  if (n_samples < 1 || n_parallel < 1) throw std::invalid_argument("presample needs n_samples >= 1 and n_parallel >= 1");

  Random rng(seed);
  std::vector<uint8_t> state(space.size(), kUnseen);
  int64_t unseen = space.size();
  UnseenPicker picker(&state, &rng);
  std::vector<int64_t> pool;  // candidate set C
  std::vector<int64_t> batch;
  std::vector<int64_t> neighbors;
  PresampleSet out;

  for (int64_t p : rng.SampleWithoutReplacement(space.size(), std::min<int64_t>(n_parallel, space.size()))) {
    batch.push_back(p);
    state[p] = kCandidate;
    --unseen;
  }

  auto enqueue = [&](int64_t q) {
    state[q] = kCandidate;
    --unseen;
    pool.push_back(q);
  };

  while (static_cast<int64_t>(out.entries.size()) < n_samples) {
    for (int64_t p : batch) {
      const bool valid = check(p);
      state[p] = kEvaluated;
      out.entries.push_back({p, valid});
      (valid ? out.valid_subset : out.invalid_subset).push_back(p);
      if (valid) {
        space.NeighborsLinear(p, &neighbors);
        for (int64_t q : neighbors) {
          if (state[q] == kUnseen) enqueue(q);
        }
      } else {
        int64_t q = picker.Pick(unseen);
        if (q >= 0) enqueue(q);
      }
    }
    if (static_cast<int64_t>(out.entries.size()) >= n_samples) break;

    while (static_cast<int64_t>(pool.size()) < n_parallel) {
      int64_t q = picker.Pick(unseen);
      if (q < 0) break;
      enqueue(q);
    }
    if (pool.empty()) {
      out.exhausted = true;
      break;
    }
    batch.clear();
    const int64_t take = std::min<int64_t>(n_parallel, static_cast<int64_t>(pool.size()));
    std::vector<int64_t> picks = rng.SampleWithoutReplacement(static_cast<int64_t>(pool.size()), take);
    for (int64_t j : picks) batch.push_back(pool[j]);
    // Remove drawn candidates from the pool, highest position first.
    std::sort(picks.begin(), picks.end(), std::greater<>());
    for (int64_t j : picks) {
      pool[j] = pool.back();
      pool.pop_back();
    }
  }
  return out;
}

std::vector<int64_t> FarthestPointSelect(const std::vector<int64_t>& candidates, const SearchSpace& space, int count,
                                         uint64_t seed) {
  const int64_t n = static_cast<int64_t>(candidates.size());
  count = static_cast<int>(std::min<int64_t>(count, n));
  std::vector<int64_t> picked;
  if (count <= 0) return picked;

  std::vector<std::vector<int32_t>> coords;
  coords.reserve(n);
  for (int64_t c : candidates) coords.push_back(space.ToCoords(c).coords);

  Random rng(seed);
  std::vector<int64_t> min_dist(n, std::numeric_limits<int64_t>::max());
  std::vector<uint8_t> taken(n, 0);
  int64_t current = rng.UniformIndex(n);
  for (int step = 0; step < count; ++step) {
    taken[current] = 1;
    picked.push_back(candidates[current]);
    if (step + 1 == count) break;
    int64_t next = -1;
    for (int64_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      min_dist[i] = std::min(min_dist[i], ManhattanDistance(coords[i], coords[current]));
      if (next < 0 || min_dist[i] > min_dist[next] ||
          (min_dist[i] == min_dist[next] && candidates[i] < candidates[next])) {
        next = i;
      }
    }
    current = next;
  }
  return picked;
}

InitialBatch SelectInitialBatch(const PresampleSet& presample, const SearchSpace& space, int epoch_size,
                                int max_valid, uint64_t seed) {
  if (epoch_size < 1) throw std::invalid_argument("epoch size must be positive");
  if (presample.valid_subset.empty() && presample.invalid_subset.empty()) {
    throw std::invalid_argument("presample set is empty");
  }
  InitialBatch batch;
  const int64_t n_valid = static_cast<int64_t>(presample.valid_subset.size());
  const int64_t n_invalid = static_cast<int64_t>(presample.invalid_subset.size());
  batch.valid_count = static_cast<int>(std::min<int64_t>({n_valid, max_valid, epoch_size}));
  batch.invalid_count = static_cast<int>(std::min<int64_t>(n_invalid, epoch_size - batch.valid_count));
  batch.configs = FarthestPointSelect(presample.valid_subset, space, batch.valid_count, MixSeed(seed, 1));
  for (int64_t c : FarthestPointSelect(presample.invalid_subset, space, batch.invalid_count, MixSeed(seed, 2))) {
    batch.configs.push_back(c);
  }
  return batch;
}

std::string PresampleToJson(const PresampleSet& presample, const std::string& workload_id) {
  nlohmann::json entries = nlohmann::json::array();
  for (const PresampleEntry& e : presample.entries) entries.push_back({e.linear, e.valid});
  nlohmann::json doc = {{"format", "hatune-presample"},
                        {"version", 1},
                        {"workload_id", workload_id},
                        {"exhausted", presample.exhausted},
                        {"entries", entries}};
  return doc.dump() + "\n";
}

PresampleSet PresampleFromJson(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  if (doc.value("format", "") != "hatune-presample") throw std::runtime_error("not a presample dump");
  PresampleSet out;
  out.exhausted = doc.value("exhausted", false);
  for (const auto& e : doc.at("entries")) {
    PresampleEntry entry{e.at(0).get<int64_t>(), e.at(1).get<bool>()};
    out.entries.push_back(entry);
    (entry.valid ? out.valid_subset : out.invalid_subset).push_back(entry.linear);
  }
  return out;
}

}  // namespace hatune
