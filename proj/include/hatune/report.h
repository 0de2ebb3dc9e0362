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
 * \file hatune/report.h
 * \brief CSV, JSON and SVG renderings of an experiment report.
 */
#ifndef HATUNE_REPORT_H_
#define HATUNE_REPORT_H_

#include <map>
#include <string>
#include <vector>

#include "hatune/harness.h"
#include "hatune/study.h"

namespace hatune {

enum class ReportFormat { kCsv, kJson, kSvg };

/*! \brief Throws std::invalid_argument for anything but csv, json or svg. */
ReportFormat ParseReportFormat(const std::string& name);
const char* ReportFormatName(ReportFormat format);

/*! \brief Shortest text that parses back to the same double; CSV and SVG attributes share it. */
std::string FormatNumber(double value);

/*! \brief Per-trial median and quartiles of best-so-far over one cell's runs. */
struct ConvergenceBand {
  std::vector<double> median;
  std::vector<double> q1;
  std::vector<double> q3;
};

/*! \brief Shorter curves are extended with their last value. */
ConvergenceBand ComputeConvergenceBand(const std::vector<const RunResult*>& runs);

std::string AggregatesCsv(const ExperimentReport& report);
std::string RunsCsv(const ExperimentReport& report);
std::string ComparisonCsv(const ComparisonSummary& summary);
/*! \brief One row per (workload, ratio, sample size). */
std::string StudyGridCsv(const std::map<std::string, StudyReport>& studies);
std::string ReportJson(const ExperimentReport& report);
/*! \brief Trials-to-best box plots, one box per workload and mode. */
std::string BoxPlotSvg(const ExperimentReport& report);
/*! \brief Median best-so-far per mode drawn bold over its shaded interquartile band. */
std::string ConvergenceSvg(const ExperimentReport& report, const std::string& workload_id);

/*!
 * \brief Writes the report in one format below `dir` and returns the written
 *  paths. An empty report is an error and leaves no files behind.
 */
std::vector<std::string> EmitReport(const ExperimentReport& report, ReportFormat format, const std::string& dir);

}  // namespace hatune

#endif  // HATUNE_REPORT_H_
