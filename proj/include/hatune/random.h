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
 * \file hatune/random.h
 * \brief Seeded random helpers with platform-independent distributions.
 *
 * The standard library distributions are implementation-defined, so every
 * run that must be bit-reproducible draws through these helpers instead.
 */
#ifndef HATUNE_RANDOM_H_
#define HATUNE_RANDOM_H_

#include <cstdint>
#include <random>
#include <vector>

namespace hatune {

/*! \brief SplitMix64 step, used to derive independent sub-seeds. */
uint64_t MixSeed(uint64_t seed, uint64_t stream);

class Random {
 public:
  explicit Random(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }
  /*! \brief Uniform integer in [0, n). n must be positive. */
  int64_t UniformIndex(int64_t n);
  /*! \brief Uniform real in [0, 1) with 53 bits of resolution. */
  double UniformReal();
  /*! \brief k distinct values from [0, n) in draw order (k <= n). */
  std::vector<int64_t> SampleWithoutReplacement(int64_t n, int64_t k);

  template <typename T>
  void Shuffle(std::vector<T>* items) {
    for (int64_t i = static_cast<int64_t>(items->size()) - 1; i > 0; --i) {
      int64_t j = UniformIndex(i + 1);
      std::swap((*items)[i], (*items)[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hatune

#endif  // HATUNE_RANDOM_H_
