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

#include "hatune/oracle.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include "json.hpp"
#include <stdexcept>

namespace hatune {

namespace {

constexpr double kClockHz = 100e6;
constexpr int64_t kDmaBytesPerCycle = 8;

std::vector<int64_t> Divisors(int64_t n) {
  std::vector<int64_t> out;
  for (int64_t d = 1; d <= n; ++d) {
    if (n % d == 0) out.push_back(d);
  }
  return out;
}

/*! \brief Knob values of one configuration, channel tiles in blocks. */
struct Tiling {
  int64_t b, h, w, ci, co;
  int order, h_threads, oc_threads;
};

/*! \brief Workload dimensions in the units the knobs tile. */
struct Extents {
  int64_t batch, out_h, out_w, ci_blocks, co_blocks, ci_block, co_block, kernel_h, kernel_w, stride_h, stride_w;

  explicit Extents(const WorkloadSpec& w)
      : batch(w.batch),
        out_h(w.out_h()),
        out_w(w.out_w()),
        ci_blocks(w.channel_in / ChannelBlock(w.channel_in)),
        co_blocks(w.channel_out / ChannelBlock(w.channel_out)),
        ci_block(ChannelBlock(w.channel_in)),
        co_block(ChannelBlock(w.channel_out)),
        kernel_h(w.kernel_h),
        kernel_w(w.kernel_w),
        stride_h(w.stride[0]),
        stride_w(w.stride[1]) {}
};

Tiling Decode(const Configuration& config, const Extents& ext) {
  if (config.values.size() != 8) throw std::invalid_argument("configuration does not have the 8 conv2d knobs");
  const auto& v = config.values;
  Tiling t{v[0], v[1], v[2], v[3], v[4], static_cast<int>(v[5]), static_cast<int>(v[6]), static_cast<int>(v[7])};
  auto divides = [](int64_t tile, int64_t extent) { return tile >= 1 && extent % tile == 0; };
  if (!divides(t.b, ext.batch) || !divides(t.h, ext.out_h) || !divides(t.w, ext.out_w) ||
      !divides(t.ci, ext.ci_blocks) || !divides(t.co, ext.co_blocks) || t.order < 1 || t.order > 4 ||
      (t.h_threads != 1 && t.h_threads != 2) || (t.oc_threads != 1 && t.oc_threads != 2)) {
    throw std::invalid_argument("configuration is not part of the workload's search space");
  }
  return t;
}

int64_t InputTileBytes(const Tiling& t, const Extents& e, const HardwareBudget& hw) {
  return t.b * t.ci * e.ci_block * (t.h * e.stride_h + e.kernel_h) * (t.w * e.stride_w + e.kernel_w) * hw.elem_bytes;
}
int64_t WeightTileBytes(const Tiling& t, const Extents& e, const HardwareBudget& hw) {
  return t.co * e.co_block * t.ci * e.ci_block * e.kernel_h * e.kernel_w * hw.elem_bytes;
}
int64_t OutputTileBytes(const Tiling& t, const Extents& e, const HardwareBudget& hw) {
  return t.b * t.co * e.co_block * t.h * t.w * hw.elem_bytes;
}

bool Fits(const Tiling& t, const Extents& e, const HardwareBudget& hw) {
  if (InputTileBytes(t, e, hw) > hw.input_buffer_bytes) return false;
  if (WeightTileBytes(t, e, hw) > hw.weight_buffer_bytes) return false;
  if (OutputTileBytes(t, e, hw) > hw.accum_buffer_bytes) return false;
  if (t.order >= 3 && t.ci * e.ci_block * t.co * e.co_block > static_cast<int64_t>(hw.compute_lanes) * hw.compute_lanes) {
    return false;
  }
  return true;
}

/*
 * Latency model, in cycles:
 *   setup * transfers + max(dma, compute) + min(dma, compute) / threads
 * Loop orders 1/3 keep the input tile resident across output-channel tiles,
 * orders 2/4 keep the weight tile resident across spatial tiles, and orders
 * 3/4 additionally keep partial sums on chip across input-channel tiles.
 * Virtual threads overlap DMA with compute only when the threaded axis has
 * at least that many tiles.
 */
double Throughput(const Tiling& t, const Extents& e, const HardwareBudget& hw) {
  const int64_t nb = e.batch / t.b, nh = e.out_h / t.h, nw = e.out_w / t.w;
  const int64_t nci = e.ci_blocks / t.ci, nco = e.co_blocks / t.co;
  const int64_t spatial = nb * nh * nw;
  const int64_t tiles = spatial * nci * nco;

  const bool input_resident = t.order == 1 || t.order == 3;
  const bool output_resident = t.order >= 3;
  const int64_t input_loads = input_resident ? spatial * nci : tiles;
  const int64_t weight_loads = input_resident ? tiles : nci * nco;
  const int64_t output_moves = output_resident ? spatial * nco : 2 * tiles;
  const int64_t transfers = input_loads + weight_loads + output_moves;
  const int64_t bytes = input_loads * InputTileBytes(t, e, hw) + weight_loads * WeightTileBytes(t, e, hw) +
                        output_moves * OutputTileBytes(t, e, hw);

  const int64_t macs = e.batch * e.out_h * e.out_w * e.ci_blocks * e.ci_block * e.co_blocks * e.co_block *
                       e.kernel_h * e.kernel_w;
  const double lanes = static_cast<double>(hw.compute_lanes);
  const double pixels = static_cast<double>(t.h * t.w);
  const double utilization = pixels / (pixels + lanes);
  const double compute = static_cast<double>(macs) / (lanes * lanes) / utilization;
  const double dma = static_cast<double>(bytes) / kDmaBytesPerCycle;

  const int64_t threads = (nh >= t.h_threads ? t.h_threads : 1) * (nco >= t.oc_threads ? t.oc_threads : 1);
  const double cycles = static_cast<double>(hw.dma_setup_cycles * transfers) + std::max(dma, compute) +
                        std::min(dma, compute) / static_cast<double>(threads);
  return 2.0 * static_cast<double>(macs) / (cycles / kClockHz) / 1e9;
}

std::string HexHash(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

void WorkloadSpec::Validate() const {
  const int dims[] = {batch, channel_out, channel_in, image_h, image_w, kernel_h, kernel_w, stride[0], stride[1]};
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("workload '" + id + "' has a non-positive dimension");
  }
  if (pad[0] < 0 || pad[1] < 0) throw std::invalid_argument("workload '" + id + "' has negative padding");
  if (image_h + 2 * pad[0] < kernel_h || image_w + 2 * pad[1] < kernel_w || out_h() < 1 || out_w() < 1) {
    throw std::invalid_argument("workload '" + id + "' has a zero-sized output image");
  }
}

void HardwareBudget::Validate() const {
  if (input_buffer_bytes < 1 || weight_buffer_bytes < 1 || accum_buffer_bytes < 1 || elem_bytes < 1 ||
      dma_setup_cycles < 1 || compute_lanes < 1) {
    throw std::invalid_argument("hardware budget entries must be positive");
  }
}

int ChannelBlock(int channels) { return channels % kChannelBlock == 0 ? kChannelBlock : 1; }

SearchSpace GenerateSpace(const WorkloadSpec& workload) {
  workload.Validate();
  const Extents e(workload);
  std::vector<Knob> knobs = {
      {"tile_b", KnobKind::kSplit, Divisors(e.batch)},
      {"tile_h", KnobKind::kSplit, Divisors(e.out_h)},
      {"tile_w", KnobKind::kSplit, Divisors(e.out_w)},
      {"tile_ci", KnobKind::kSplit, Divisors(e.ci_blocks)},
      {"tile_co", KnobKind::kSplit, Divisors(e.co_blocks)},
      {"loop_order", KnobKind::kOtherOption, {1, 2, 3, 4}},
      {"h_threading", KnobKind::kOtherOption, {1, 2}},
      {"oc_threading", KnobKind::kOtherOption, {1, 2}},
  };
  return SearchSpace(std::move(knobs), workload.id);
}

bool CheckValidity(const Configuration& config, const WorkloadSpec& workload, const HardwareBudget& hw) {
  const Extents e(workload);
  return Fits(Decode(config, e), e, hw);
}

MeasurementResult Measure(const Configuration& config, const WorkloadSpec& workload, const HardwareBudget& hw) {
  const Extents e(workload);
  const Tiling t = Decode(config, e);
  if (!Fits(t, e, hw)) return {false, 0.0};
  return {true, Throughput(t, e, hw)};
}

GroundTruthTable::GroundTruthTable(std::string workload_id, uint64_t space_hash, std::vector<MeasurementResult> entries)
    : workload_id_(std::move(workload_id)), space_hash_(space_hash), entries_(std::move(entries)) {
  valid_mask_.resize(entries_.size());
  for (size_t i = 0; i < entries_.size(); ++i) {
    const MeasurementResult& m = entries_[i];
    if (!m.valid && m.gflops != 0.0) throw std::invalid_argument("invalid ground-truth entry with nonzero gflops");
    if (m.valid && !(m.gflops > 0.0)) throw std::invalid_argument("valid ground-truth entry without throughput");
    valid_mask_[i] = m.valid ? 1 : 0;
    if (m.valid) {
      ++valid_count_;
      if (m.gflops > best_gflops_) {
        best_gflops_ = m.gflops;
        best_index_ = static_cast<int64_t>(i);
      }
    }
  }
}

void GroundTruthTable::CheckCovers(const SearchSpace& space) const {
  if (size() != space.size() || space_hash_ != space.Hash()) {
    throw std::invalid_argument("ground truth for '" + workload_id_ + "' does not match the search space");
  }
}

GroundTruthTable RecordGroundTruth(const WorkloadSpec& workload, const HardwareBudget& hw, int64_t max_size) {
  hw.Validate();
  const SearchSpace space = GenerateSpace(workload);
  if (space.size() > max_size) {
    throw std::length_error("search space of '" + workload.id + "' has " + std::to_string(space.size()) +
                            " configurations, over the exhaustive budget of " + std::to_string(max_size));
  }
  std::vector<MeasurementResult> entries(space.size());
  for (int64_t i = 0; i < space.size(); ++i) entries[i] = Measure(space.Resolve(i), workload, hw);
  return GroundTruthTable(workload.id, space.Hash(), std::move(entries));
}

void SaveGroundTruth(const GroundTruthTable& table, const std::string& path) {
  std::string bits(table.size(), '0');
  nlohmann::json gflops = nlohmann::json::array();
  for (int64_t i = 0; i < table.size(); ++i) {
    if (table.at(i).valid) bits[i] = '1';
    gflops.push_back(table.at(i).gflops);
  }
  nlohmann::json doc = {{"format", "hatune-ground-truth"},
                        {"version", 1},
                        {"workload_id", table.workload_id()},
                        {"space_hash", HexHash(table.space_hash())},
                        {"size", table.size()},
                        {"valid_ratio", table.valid_ratio()},
                        {"valid", bits},
                        {"gflops", gflops}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump() << "\n";
}

GroundTruthTable LoadGroundTruth(const std::string& path, const SearchSpace& space) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  if (doc.value("format", "") != "hatune-ground-truth" || doc.value("version", 0) != 1) {
    throw std::runtime_error(path + ": not a version-1 ground-truth file");
  }
  if (doc.at("space_hash").get<std::string>() != HexHash(space.Hash())) {
    throw std::runtime_error(path + ": space hash mismatch");
  }
  const int64_t size = doc.at("size").get<int64_t>();
  const std::string bits = doc.at("valid").get<std::string>();
  const auto& gflops = doc.at("gflops");
  if (size != space.size() || static_cast<int64_t>(bits.size()) != size || static_cast<int64_t>(gflops.size()) != size) {
    throw std::runtime_error(path + ": entry count does not match the search space");
  }
  std::vector<MeasurementResult> entries(size);
  for (int64_t i = 0; i < size; ++i) entries[i] = {bits[i] == '1', gflops[i].get<double>()};
  return GroundTruthTable(doc.at("workload_id").get<std::string>(), space.Hash(), std::move(entries));
}

GraphSummary ValidityGraph(const SearchSpace& space, const GroundTruthTable& truth, int shuffles, uint64_t seed) {
  truth.CheckCovers(space);
  return ValidityGraph(space, truth.valid_mask(), shuffles, seed);
}

}  // namespace hatune
