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

#include "hatune/suite.h"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace hatune {

namespace {

using nlohmann::json;

const json& Field(const json& obj, const std::string& name, const std::string& where) {
  if (!obj.is_object() || !obj.contains(name)) throw std::runtime_error(where + ": missing field '" + name + "'");
  return obj.at(name);
}

int IntField(const json& obj, const std::string& name, const std::string& where) {
  const json& v = Field(obj, name, where);
  if (!v.is_number_integer()) throw std::runtime_error(where + ": field '" + name + "' must be an integer");
  return v.get<int>();
}

double RealField(const json& obj, const std::string& name, const std::string& where) {
  const json& v = Field(obj, name, where);
  if (!v.is_number()) throw std::runtime_error(where + ": field '" + name + "' must be a number");
  return v.get<double>();
}

std::array<int, 2> PairField(const json& obj, const std::string& name, const std::string& where) {
  const json& v = Field(obj, name, where);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
    throw std::runtime_error(where + ": field '" + name + "' must be a pair of integers");
  }
  return {v[0].get<int>(), v[1].get<int>()};
}

}  // namespace

const std::vector<std::string>& SuiteWorkloadIds() {
  static const std::vector<std::string> ids = {"3",  "5",  "8",  "17", "42",  "48", "53",
                                               "59", "76", "78", "92", "106", "107"};
  return ids;
}

std::string DefaultSuitePath() { return std::string(HATUNE_FIXTURE_DIR) + "/suite.json"; }

const SuiteEntry& SuiteManifest::Find(const std::string& id) const {
  for (const SuiteEntry& e : workloads) {
    if (e.workload.id == id) return e;
  }
  throw std::out_of_range("workload '" + id + "' not in suite");
}

SuiteManifest ParseSuite(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw std::runtime_error(std::string("suite manifest is not valid JSON: ") + err.what());
  }
  SuiteManifest suite;
  const json& version = Field(doc, "version", "suite");
  if (!version.is_string()) throw std::runtime_error("suite: field 'version' must be a string");
  suite.version = version.get<std::string>();
  const json& list = Field(doc, "workloads", "suite");
  if (!list.is_array()) throw std::runtime_error("suite: field 'workloads' must be an array");

  for (size_t i = 0; i < list.size(); ++i) {
    const std::string where = "workloads[" + std::to_string(i) + "]";
    const json& item = list[i];
    SuiteEntry entry;
    const json& id = Field(item, "id", where);
    if (!id.is_string()) throw std::runtime_error(where + ": field 'id' must be a string");
    WorkloadSpec& w = entry.workload;
    w.id = id.get<std::string>();
    w.batch = IntField(item, "batch", where);
    w.channel_out = IntField(item, "channel_out", where);
    w.channel_in = IntField(item, "channel_in", where);
    w.image_h = IntField(item, "image_h", where);
    w.image_w = IntField(item, "image_w", where);
    w.kernel_h = IntField(item, "kernel_h", where);
    w.kernel_w = IntField(item, "kernel_w", where);
    w.stride = PairField(item, "stride", where);
    w.pad = PairField(item, "pad", where);
    try {
      w.Validate();
    } catch (const std::invalid_argument& err) {
      throw std::runtime_error(where + ": " + err.what());
    }

    const std::string hw_where = where + ".budget";
    const json& hw = Field(item, "budget", where);
    entry.budget.input_buffer_bytes = IntField(hw, "input_buffer_bytes", hw_where);
    entry.budget.weight_buffer_bytes = IntField(hw, "weight_buffer_bytes", hw_where);
    entry.budget.accum_buffer_bytes = IntField(hw, "accum_buffer_bytes", hw_where);
    entry.budget.elem_bytes = IntField(hw, "elem_bytes", hw_where);
    entry.budget.dma_setup_cycles = IntField(hw, "dma_setup_cycles", hw_where);
    entry.budget.compute_lanes = IntField(hw, "compute_lanes", hw_where);
    try {
      entry.budget.Validate();
    } catch (const std::invalid_argument& err) {
      throw std::runtime_error(hw_where + ": " + err.what());
    }

    entry.reference_ratio = RealField(item, "reference_ratio", where);
    const json& band = Field(item, "ratio_band", where);
    if (!band.is_array() || band.size() != 2 || !band[0].is_number() || !band[1].is_number() ||
        band[0].get<double>() > band[1].get<double>()) {
      throw std::runtime_error(where + ": field 'ratio_band' must be an ascending pair of numbers");
    }
    entry.ratio_low = band[0].get<double>();
    entry.ratio_high = band[1].get<double>();
    suite.workloads.push_back(std::move(entry));
  }

  std::set<std::string> present;
  for (const SuiteEntry& e : suite.workloads) {
    if (!present.insert(e.workload.id).second) throw std::runtime_error("suite: duplicate workload '" + e.workload.id + "'");
  }
  for (const std::string& id : SuiteWorkloadIds()) {
    if (!present.count(id)) throw std::runtime_error("suite: missing workload '" + id + "'");
  }
  if (suite.workloads.size() != SuiteWorkloadIds().size()) throw std::runtime_error("suite: unexpected extra workloads");
  return suite;
}

SuiteManifest LoadSuite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read suite manifest " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseSuite(buf.str());
}

std::string SerializeSuite(const SuiteManifest& suite) {
  json list = json::array();
  for (const SuiteEntry& e : suite.workloads) {
    const WorkloadSpec& w = e.workload;
    const HardwareBudget& hw = e.budget;
    list.push_back({{"id", w.id},
                    {"batch", w.batch},
                    {"channel_out", w.channel_out},
                    {"channel_in", w.channel_in},
                    {"image_h", w.image_h},
                    {"image_w", w.image_w},
                    {"kernel_h", w.kernel_h},
                    {"kernel_w", w.kernel_w},
                    {"stride", w.stride},
                    {"pad", w.pad},
                    {"budget",
                     {{"input_buffer_bytes", hw.input_buffer_bytes},
                      {"weight_buffer_bytes", hw.weight_buffer_bytes},
                      {"accum_buffer_bytes", hw.accum_buffer_bytes},
                      {"elem_bytes", hw.elem_bytes},
                      {"dma_setup_cycles", hw.dma_setup_cycles},
                      {"compute_lanes", hw.compute_lanes}}},
                    {"reference_ratio", e.reference_ratio},
                    {"ratio_band", {e.ratio_low, e.ratio_high}}});
  }
  json doc = {{"version", suite.version}, {"workloads", list}};
  return doc.dump(2) + "\n";
}

}  // namespace hatune
