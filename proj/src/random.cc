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

#include "hatune/random.h"

#include <stdexcept>
#include <unordered_set>

namespace hatune {

uint64_t MixSeed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int64_t Random::UniformIndex(int64_t n) {
  if (n <= 0) throw std::invalid_argument("UniformIndex: n must be positive");
  const uint64_t range = static_cast<uint64_t>(n);
  // Rejection keeps the draw unbiased.
  const uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
  uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<int64_t>(x % range);
}

double Random::UniformReal() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::vector<int64_t> Random::SampleWithoutReplacement(int64_t n, int64_t k) {
  if (k < 0 || k > n) throw std::invalid_argument("SampleWithoutReplacement: k out of range");
  std::vector<int64_t> out;
  out.reserve(k);
  if (k * 4 >= n) {
    std::vector<int64_t> all(n);
    for (int64_t i = 0; i < n; ++i) all[i] = i;
    for (int64_t i = 0; i < k; ++i) {
      int64_t j = i + UniformIndex(n - i);
      std::swap(all[i], all[j]);
      out.push_back(all[i]);
    }
    return out;
  }
  std::unordered_set<int64_t> seen;
  while (static_cast<int64_t>(out.size()) < k) {
    int64_t x = UniformIndex(n);
    if (seen.insert(x).second) out.push_back(x);
  }
  return out;
}

}  // namespace hatune
