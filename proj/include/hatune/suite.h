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
 * \file hatune/suite.h
 * \brief The calibrated Conv2D workload suite shipped under fixtures/.
 */
#ifndef HATUNE_SUITE_H_
#define HATUNE_SUITE_H_

#include <string>
#include <vector>

#include "hatune/oracle.h"

namespace hatune {

struct SuiteEntry {
  WorkloadSpec workload;
  HardwareBudget budget;
  /*! \brief Valid ratio reported for the real accelerator; the band is derived from it. */
  double reference_ratio = 0;
  double ratio_low = 0;
  double ratio_high = 1;
};

struct SuiteManifest {
  std::string version;
  std::vector<SuiteEntry> workloads;

  /*! \brief Throws std::out_of_range naming the id when absent. */
  const SuiteEntry& Find(const std::string& id) const;
};

/*! \brief Workload ids the manifest must contain, in suite order. */
const std::vector<std::string>& SuiteWorkloadIds();

std::string DefaultSuitePath();

/*!
 * \brief Parses and validates a manifest. Schema problems raise
 *  std::runtime_error whose message names the offending field.
 */
SuiteManifest LoadSuite(const std::string& path);
SuiteManifest ParseSuite(const std::string& text);
std::string SerializeSuite(const SuiteManifest& suite);

}  // namespace hatune

#endif  // HATUNE_SUITE_H_
