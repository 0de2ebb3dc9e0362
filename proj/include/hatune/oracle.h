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
 * \file hatune/oracle.h
 * \brief Synthetic tensor-accelerator oracle for Conv2D tuning spaces.
 *
 * The oracle stands in for compiling and running a configuration on a
 * GEMM-core accelerator with three on-chip buffers (input, weight,
 * accumulator). A configuration is invalid when a tile overflows one of
 * the buffers, or when an output-stationary loop order (3 or 4) needs a
 * channel tile product beyond compute_lanes^2. Valid configurations get a
 * deterministic, noise-free throughput from an analytic latency model.
 *
 * Channel tiles are counted in blocks of kChannelBlock channels, the GEMM
 * core's native vector width.
 */
#ifndef HATUNE_ORACLE_H_
#define HATUNE_ORACLE_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hatune/search_space.h"

namespace hatune {

constexpr int kChannelBlock = 16;

struct WorkloadSpec {
  std::string id;
  int batch = 1;
  int channel_out = 1;
  int channel_in = 1;
  int image_h = 1;
  int image_w = 1;
  int kernel_h = 1;
  int kernel_w = 1;
  std::array<int, 2> stride{1, 1};
  std::array<int, 2> pad{0, 0};

  int out_h() const { return (image_h + 2 * pad[0] - kernel_h) / stride[0] + 1; }
  int out_w() const { return (image_w + 2 * pad[1] - kernel_w) / stride[1] + 1; }
  /*! \brief Throws std::invalid_argument when a dimension is non-positive or the output is empty. */
  void Validate() const;
};

struct HardwareBudget {
  int64_t input_buffer_bytes = 32 * 1024;
  int64_t weight_buffer_bytes = 256 * 1024;
  int64_t accum_buffer_bytes = 128 * 1024;
  int elem_bytes = 1;
  int dma_setup_cycles = 64;
  int compute_lanes = 32;

  void Validate() const;
};

struct MeasurementResult {
  bool valid = false;
  /*! \brief GFLOP/s; exactly 0 for invalid configurations. */
  double gflops = 0;
};

/*! \brief Channel block width used for a channel count (kChannelBlock if it divides, else 1). */
int ChannelBlock(int channels);

/*!
 * \brief Knob menu for a workload, in this fixed order:
 *  tile_b, tile_h, tile_w, tile_ci, tile_co, loop_order, h_threading, oc_threading.
 */
SearchSpace GenerateSpace(const WorkloadSpec& workload);

/*! \brief Buffer-capacity and loop-order check; throws if the configuration is not in the workload's space. */
bool CheckValidity(const Configuration& config, const WorkloadSpec& workload, const HardwareBudget& hw);

/*! \brief Deterministic throughput of a configuration (0 when invalid). */
MeasurementResult Measure(const Configuration& config, const WorkloadSpec& workload, const HardwareBudget& hw);

/*! \brief Exhaustive validity/throughput record for a whole search space. */
class GroundTruthTable {
 public:
  GroundTruthTable() = default;
  GroundTruthTable(std::string workload_id, uint64_t space_hash, std::vector<MeasurementResult> entries);

  const std::string& workload_id() const { return workload_id_; }
  uint64_t space_hash() const { return space_hash_; }
  int64_t size() const { return static_cast<int64_t>(entries_.size()); }
  const MeasurementResult& at(int64_t linear) const { return entries_.at(linear); }
  const std::vector<MeasurementResult>& entries() const { return entries_; }
  /*! \brief One byte per configuration, 1 when valid. */
  const std::vector<uint8_t>& valid_mask() const { return valid_mask_; }
  int64_t valid_count() const { return valid_count_; }
  double valid_ratio() const { return entries_.empty() ? 0.0 : static_cast<double>(valid_count_) / size(); }
  double best_gflops() const { return best_gflops_; }
  /*! \brief Lowest linear index reaching best_gflops, or -1 when nothing is valid. */
  int64_t best_index() const { return best_index_; }
  /*! \brief Throws std::invalid_argument unless this table was recorded for `space`. */
  void CheckCovers(const SearchSpace& space) const;

 private:
  std::string workload_id_;
  uint64_t space_hash_ = 0;
  std::vector<MeasurementResult> entries_;
  std::vector<uint8_t> valid_mask_;
  int64_t valid_count_ = 0;
  double best_gflops_ = 0;
  int64_t best_index_ = -1;
};

constexpr int64_t kDefaultExhaustiveBudget = 200000;

/*! \brief Measures every configuration of GenerateSpace(workload); throws when the space exceeds `max_size`. */
GroundTruthTable RecordGroundTruth(const WorkloadSpec& workload, const HardwareBudget& hw,
                                   int64_t max_size = kDefaultExhaustiveBudget);

/*! \brief JSON with header {format, version, workload_id, space_hash, size, valid_ratio} and dense entries. */
void SaveGroundTruth(const GroundTruthTable& table, const std::string& path);
/*! \brief Loads a table and checks it against `space`; a hash or size mismatch is an error. */
GroundTruthTable LoadGroundTruth(const std::string& path, const SearchSpace& space);

GraphSummary ValidityGraph(const SearchSpace& space, const GroundTruthTable& truth, int shuffles = 100,
                           uint64_t seed = 0);

}  // namespace hatune

#endif  // HATUNE_ORACLE_H_
