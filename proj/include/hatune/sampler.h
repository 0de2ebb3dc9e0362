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
 * \file hatune/sampler.h
 * \brief Locality-driven validity presampling and distance-maximizing
 *  selection of the initial measurement batch.
 */
#ifndef HATUNE_SAMPLER_H_
#define HATUNE_SAMPLER_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hatune/search_space.h"

namespace hatune {

/*! \brief Validity oracle over linear indices. */
using ValidityCheck = std::function<bool(int64_t linear)>;

struct PresampleEntry {
  int64_t linear = 0;
  bool valid = false;
};

struct PresampleSet {
  /*! \brief Evaluated configurations in evaluation order. */
  std::vector<PresampleEntry> entries;
  std::vector<int64_t> valid_subset;
  std::vector<int64_t> invalid_subset;
  /*! \brief Set when every configuration of the space was evaluated before reaching n_samples. */
  bool exhausted = false;
};

/*!
 * \brief Explores the space for validity, starting from n_parallel random
 *  points. A valid point queues its unseen grid neighbours as candidates, an
 *  invalid one queues a single random unseen point. Each round evaluates up
 *  to n_parallel candidates drawn uniformly from the pool, and stops once at
 *  least n_samples configurations are known.
 *
 * The candidate pool persists across rounds and is topped up with random
 * unseen points whenever it holds fewer than n_parallel entries. No
 * configuration is evaluated twice. A budget larger than the space returns
 * the whole space with `exhausted` set.
 */
PresampleSet Presample(int64_t n_samples, int n_parallel, const SearchSpace& space, const ValidityCheck& check,
                       uint64_t seed);

struct InitialBatch {
  std::vector<int64_t> configs;
  int valid_count = 0;
  int invalid_count = 0;
};

/*!
 * \brief min(|valid|, max_valid) valid plus min(|invalid|, epoch_size - valid
 *  picks) invalid configurations, each part chosen by greedy farthest-point
 *  selection under Manhattan distance. Valid picks come first in `configs`.
 */
InitialBatch SelectInitialBatch(const PresampleSet& presample, const SearchSpace& space, int epoch_size,
                                int max_valid, uint64_t seed);

/*!
 * \brief Greedy k-center: a seeded-random first pick, then repeatedly the
 *  candidate farthest from everything picked so far (ties: lowest linear index).
 */
std::vector<int64_t> FarthestPointSelect(const std::vector<int64_t>& candidates, const SearchSpace& space, int count,
                                         uint64_t seed);

std::string PresampleToJson(const PresampleSet& presample, const std::string& workload_id);
PresampleSet PresampleFromJson(const std::string& text);

}  // namespace hatune

#endif  // HATUNE_SAMPLER_H_
