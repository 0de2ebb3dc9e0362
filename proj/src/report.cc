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
 * \file report.cc
 * \brief Report rendering.
 */
#include "hatune/report.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace hatune {

namespace fs = std::filesystem;

namespace {

const char* ModeColor(TunerMode mode) { return mode == TunerMode::kEnhanced ? "#1f77b4" : "#7f7f7f"; }

std::string Px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string JoinOutliers(const std::vector<double>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += FormatNumber(values[i]);
  }
  return out;
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw std::runtime_error("write failed: " + path.string());
}

nlohmann::ordered_json AggregateJson(const AggregateStatistics& a) {
  return {{"count", a.count},   {"median", a.median},           {"q1", a.q1},
          {"q3", a.q3},         {"iqr", a.iqr},                 {"whisker_low", a.whisker_low},
          {"whisker_high", a.whisker_high}, {"outliers", a.outliers}};
}

nlohmann::ordered_json NullableNumber(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

int64_t MaxTrials(const ExperimentReport& report) {
  int64_t m = 1;
  for (const RunResult& r : report.runs) m = std::max(m, r.total_trials + 1);
  return m;
}

}  // namespace

ReportFormat ParseReportFormat(const std::string& name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  if (name == "svg") return ReportFormat::kSvg;
  throw std::invalid_argument("unknown report format '" + name + "' (expected csv, json or svg)");
}

const char* ReportFormatName(ReportFormat format) {
  switch (format) {
    case ReportFormat::kCsv: return "csv";
    case ReportFormat::kJson: return "json";
    case ReportFormat::kSvg: return "svg";
  }
  return "?";
}

std::string FormatNumber(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

ConvergenceBand ComputeConvergenceBand(const std::vector<const RunResult*>& runs) {
  ConvergenceBand band;
  size_t length = 0;
  for (const RunResult* r : runs) length = std::max(length, r->stats.convergence_curve.size());
  std::vector<double> column(runs.size());
  for (size_t t = 0; t < length; ++t) {
    for (size_t i = 0; i < runs.size(); ++i) {
      const auto& curve = runs[i]->stats.convergence_curve;
      column[i] = curve.empty() ? 0.0 : curve[std::min(t, curve.size() - 1)].second;
    }
    band.median.push_back(Quantile(column, 0.5));
    band.q1.push_back(Quantile(column, 0.25));
    band.q3.push_back(Quantile(column, 0.75));
  }
  return band;
}

std::string AggregatesCsv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "workload,mode,count,median,q1,q3,iqr,whisker_low,whisker_high,outliers,"
         "mean_presample_s,mean_fit_s,mean_select_s,mean_measure_s,mean_total_s,"
         "known_invalid_measured,known_invalid_selected\n";
  for (const CellSummary& c : report.cells) {
    const AggregateStatistics& a = c.trials_to_best;
    out << c.workload_id << ',' << TunerModeName(c.mode) << ',' << a.count << ',' << FormatNumber(a.median) << ','
        << FormatNumber(a.q1) << ',' << FormatNumber(a.q3) << ',' << FormatNumber(a.iqr) << ','
        << FormatNumber(a.whisker_low) << ',' << FormatNumber(a.whisker_high) << ',' << JoinOutliers(a.outliers)
        << ',' << FormatNumber(c.mean_timings.presample) << ',' << FormatNumber(c.mean_timings.fit) << ','
        << FormatNumber(c.mean_timings.select) << ',' << FormatNumber(c.mean_timings.measure) << ','
        << FormatNumber(c.mean_timings.total) << ',' << c.known_invalid_measured << ','
        << c.known_invalid_selected << '\n';
  }
  return out.str();
}

std::string RunsCsv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "workload,mode,repeat,seed,total_trials,trials_to_best,final_best,valid_measured,known_invalid_measured,"
         "known_invalid_selected,presample_size,presample_valid_fraction,presample_s,fit_s,select_s,measure_s,total_s\n";
  for (const RunResult& r : report.runs) {
    const double final_best = r.stats.convergence_curve.empty() ? 0.0 : r.stats.convergence_curve.back().second;
    out << r.key.workload_id << ',' << TunerModeName(r.key.mode) << ',' << r.key.repeat << ',' << r.key.seed << ','
        << r.total_trials << ',' << r.stats.trials_to_best << ',' << FormatNumber(final_best) << ','
        << r.valid_measured << ',' << r.known_invalid_measured << ',' << r.known_invalid_selected << ','
        << r.presample_size << ','
        << (std::isnan(r.presample_valid_fraction) ? std::string() : FormatNumber(r.presample_valid_fraction)) << ','
        << FormatNumber(r.timings.presample) << ',' << FormatNumber(r.timings.fit) << ','
        << FormatNumber(r.timings.select) << ',' << FormatNumber(r.timings.measure) << ','
        << FormatNumber(r.timings.total) << '\n';
  }
  return out.str();
}

std::string ComparisonCsv(const ComparisonSummary& summary) {
  std::ostringstream out;
  out << "workload,baseline_median,enhanced_median,median_ratio,baseline_iqr,enhanced_iqr,iqr_ratio,enhanced_wins\n";
  for (const ModeComparison& c : summary.workloads) {
    out << c.workload_id << ',' << FormatNumber(c.baseline_median) << ',' << FormatNumber(c.enhanced_median) << ','
        << FormatNumber(c.median_ratio) << ',' << FormatNumber(c.baseline_iqr) << ','
        << FormatNumber(c.enhanced_iqr) << ',' << FormatNumber(c.iqr_ratio) << ',' << (c.enhanced_wins ? 1 : 0)
        << '\n';
  }
  out << "mean,,," << FormatNumber(summary.mean_median_ratio) << ",,," << FormatNumber(summary.mean_iqr_ratio) << ','
      << summary.wins << '\n';
  return out.str();
}

std::string StudyGridCsv(const std::map<std::string, StudyReport>& studies) {
  std::ostringstream out;
  out << "workload,ratio,sample_size,n_at,valid_rows,ndcg,precision,accuracy_valid_invalid,accuracy_valid_valid,"
         "ndcg_samples,precision_samples,valid_invalid_samples,valid_valid_samples\n";
  for (const auto& [id, study] : studies) {
    for (const StudyCell& c : study.cells) {
      out << id << ',' << FormatNumber(c.ratio) << ',' << c.sample_size << ',' << study.n_at << ',' << c.valid_rows
          << ',' << FormatNumber(c.ndcg) << ',' << FormatNumber(c.precision) << ','
          << FormatNumber(c.accuracy_valid_invalid) << ',' << FormatNumber(c.accuracy_valid_valid) << ','
          << c.ndcg_samples << ',' << c.precision_samples << ',' << c.valid_invalid_samples << ','
          << c.valid_valid_samples << '\n';
    }
  }
  return out.str();
}

std::string ReportJson(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["format"] = "hatune-report";
  j["version"] = 1;
  j["workloads"] = report.workload_ids;
  nlohmann::ordered_json modes = nlohmann::ordered_json::array();
  for (TunerMode m : report.modes) modes.push_back(TunerModeName(m));
  j["modes"] = modes;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const CellSummary& c : report.cells) {
    cells.push_back({{"workload", c.workload_id},
                     {"mode", TunerModeName(c.mode)},
                     {"trials_to_best", AggregateJson(c.trials_to_best)},
                     {"mean_timings",
                      {{"presample", c.mean_timings.presample},
                       {"fit", c.mean_timings.fit},
                       {"select", c.mean_timings.select},
                       {"measure", c.mean_timings.measure},
                       {"total", c.mean_timings.total}}},
                     {"known_invalid_measured", c.known_invalid_measured},
                     {"known_invalid_selected", c.known_invalid_selected}});
  }
  j["cells"] = cells;
  const bool both = std::count(report.modes.begin(), report.modes.end(), TunerMode::kBaseline) &&
                    std::count(report.modes.begin(), report.modes.end(), TunerMode::kEnhanced);
  if (both) {
    const ComparisonSummary s = CompareModes(report);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const ModeComparison& c : s.workloads) {
      rows.push_back({{"workload", c.workload_id},
                      {"median_ratio", NullableNumber(c.median_ratio)},
                      {"iqr_ratio", NullableNumber(c.iqr_ratio)},
                      {"enhanced_wins", c.enhanced_wins}});
    }
    j["comparison"] = {{"workloads", rows},
                       {"mean_median_ratio", NullableNumber(s.mean_median_ratio)},
                       {"mean_iqr_ratio", NullableNumber(s.mean_iqr_ratio)},
                       {"wins", s.wins}};
  }
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const RunResult& r : report.runs) {
    runs.push_back({{"workload", r.key.workload_id},
                    {"mode", TunerModeName(r.key.mode)},
                    {"repeat", r.key.repeat},
                    {"seed", r.key.seed},
                    {"trials_to_best", r.stats.trials_to_best},
                    {"known_invalid_measured", r.known_invalid_measured},
                    {"known_invalid_selected", r.known_invalid_selected}});
  }
  j["runs"] = runs;
  if (!report.studies.empty()) {
    nlohmann::ordered_json studies;
    for (const auto& [id, study] : report.studies) {
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (const StudyCell& c : study.cells) {
        rows.push_back({{"ratio", c.ratio},
                        {"sample_size", c.sample_size},
                        {"ndcg", NullableNumber(c.ndcg)},
                        {"precision", NullableNumber(c.precision)},
                        {"accuracy_valid_invalid", NullableNumber(c.accuracy_valid_invalid)},
                        {"accuracy_valid_valid", NullableNumber(c.accuracy_valid_valid)}});
      }
      studies[id] = rows;
    }
    j["studies"] = studies;
  }
  return j.dump(2) + "\n";
}

std::string BoxPlotSvg(const ExperimentReport& report) {
  const double kLeft = 60, kRight = 20, kTop = 30, kBottom = 50, kHeight = 360;
  const double kSlot = 44, kBoxWidth = 14;
  const double width = kLeft + kRight + kSlot * static_cast<double>(report.workload_ids.size());
  const double y_max = static_cast<double>(MaxTrials(report));
  auto y = [&](double v) { return kTop + kHeight * (1.0 - v / y_max); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Px(width) << "\" height=\""
    << Px(kTop + kHeight + kBottom) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<text x=\"" << Px(kLeft) << "\" y=\"18\">trials to best configuration</text>\n";
  s << "<line x1=\"" << Px(kLeft) << "\" y1=\"" << Px(kTop) << "\" x2=\"" << Px(kLeft) << "\" y2=\""
    << Px(kTop + kHeight) << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = y_max * tick / 4.0;
    s << "<text x=\"" << Px(kLeft - 6) << "\" y=\"" << Px(y(v) + 4) << "\" text-anchor=\"end\">"
      << std::lround(v) << "</text>\n";
  }
  for (size_t w = 0; w < report.workload_ids.size(); ++w) {
    const std::string& id = report.workload_ids[w];
    const double slot_x = kLeft + kSlot * static_cast<double>(w);
    s << "<text x=\"" << Px(slot_x + kSlot / 2) << "\" y=\"" << Px(kTop + kHeight + 16)
      << "\" text-anchor=\"middle\">" << Escape(id) << "</text>\n";
    for (size_t m = 0; m < report.modes.size(); ++m) {
      const TunerMode mode = report.modes[m];
      const AggregateStatistics& a = report.Cell(id, mode).trials_to_best;
      const double cx = slot_x + kSlot * (static_cast<double>(m) + 1) / static_cast<double>(report.modes.size() + 1);
      const char* color = ModeColor(mode);
      s << "<g class=\"box\" data-workload=\"" << Escape(id) << "\" data-mode=\"" << TunerModeName(mode)
        << "\" data-count=\"" << a.count << "\" data-median=\"" << FormatNumber(a.median) << "\" data-q1=\""
        << FormatNumber(a.q1) << "\" data-q3=\"" << FormatNumber(a.q3) << "\" data-whisker-low=\""
        << FormatNumber(a.whisker_low) << "\" data-whisker-high=\"" << FormatNumber(a.whisker_high) << "\">\n";
      s << "  <line x1=\"" << Px(cx) << "\" y1=\"" << Px(y(a.whisker_low)) << "\" x2=\"" << Px(cx) << "\" y2=\""
        << Px(y(a.whisker_high)) << "\" stroke=\"" << color << "\"/>\n";
      s << "  <rect x=\"" << Px(cx - kBoxWidth / 2) << "\" y=\"" << Px(y(a.q3)) << "\" width=\"" << Px(kBoxWidth)
        << "\" height=\"" << Px(y(a.q1) - y(a.q3)) << "\" fill=\"" << color << "\" fill-opacity=\"0.35\" stroke=\""
        << color << "\"/>\n";
      s << "  <line x1=\"" << Px(cx - kBoxWidth / 2) << "\" y1=\"" << Px(y(a.median)) << "\" x2=\""
        << Px(cx + kBoxWidth / 2) << "\" y2=\"" << Px(y(a.median)) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
      for (double o : a.outliers) {
        s << "  <circle class=\"outlier\" data-value=\"" << FormatNumber(o) << "\" cx=\"" << Px(cx) << "\" cy=\""
          << Px(y(o)) << "\" r=\"2\" fill=\"none\" stroke=\"" << color << "\"/>\n";
      }
      s << "</g>\n";
    }
  }
  double legend_x = kLeft;
  for (TunerMode mode : report.modes) {
    s << "<rect x=\"" << Px(legend_x) << "\" y=\"" << Px(kTop + kHeight + 28) << "\" width=\"10\" height=\"10\" fill=\""
      << ModeColor(mode) << "\"/><text x=\"" << Px(legend_x + 14) << "\" y=\"" << Px(kTop + kHeight + 37) << "\">"
      << TunerModeName(mode) << "</text>\n";
    legend_x += 90;
  }
  s << "</svg>\n";
  return s.str();
}

std::string ConvergenceSvg(const ExperimentReport& report, const std::string& workload_id) {
  const double kLeft = 60, kRight = 20, kTop = 30, kBottom = 40, kWidth = 480, kHeight = 280;
  std::vector<ConvergenceBand> bands;
  double y_max = 0;
  size_t x_max = 1;
  for (TunerMode mode : report.modes) {
    bands.push_back(ComputeConvergenceBand(report.CellRuns(workload_id, mode)));
    for (double v : bands.back().q3) y_max = std::max(y_max, v);
    x_max = std::max(x_max, bands.back().median.size());
  }
  if (y_max <= 0) y_max = 1;
  auto x = [&](size_t t) { return kLeft + kWidth * static_cast<double>(t + 1) / static_cast<double>(x_max); };
  auto y = [&](double v) { return kTop + kHeight * (1.0 - v / y_max); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Px(kLeft + kWidth + kRight) << "\" height=\""
    << Px(kTop + kHeight + kBottom) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<text x=\"" << Px(kLeft) << "\" y=\"18\">workload " << Escape(workload_id)
    << ": best GFLOP/s so far over trials</text>\n";
  s << "<path d=\"M" << Px(kLeft) << ' ' << Px(kTop) << " V" << Px(kTop + kHeight) << " H" << Px(kLeft + kWidth)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<text x=\"" << Px(kLeft - 6) << "\" y=\"" << Px(kTop + 4) << "\" text-anchor=\"end\">" << Px(y_max)
    << "</text>\n";
  s << "<text x=\"" << Px(kLeft + kWidth) << "\" y=\"" << Px(kTop + kHeight + 16) << "\" text-anchor=\"end\">"
    << x_max << "</text>\n";
  for (size_t m = 0; m < report.modes.size(); ++m) {
    const ConvergenceBand& b = bands[m];
    const char* color = ModeColor(report.modes[m]);
    s << "<g class=\"curve\" data-mode=\"" << TunerModeName(report.modes[m]) << "\">\n";
    s << "  <polygon class=\"iqr\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (size_t t = 0; t < b.q3.size(); ++t) s << Px(x(t)) << ',' << Px(y(b.q3[t])) << ' ';
    for (size_t t = b.q1.size(); t-- > 0;) s << Px(x(t)) << ',' << Px(y(b.q1[t])) << ' ';
    s << "\"/>\n";
    s << "  <polyline class=\"median\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2.5\" points=\"";
    for (size_t t = 0; t < b.median.size(); ++t) s << Px(x(t)) << ',' << Px(y(b.median[t])) << ' ';
    s << "\"/>\n</g>\n";
    s << "<text x=\"" << Px(kLeft + 10 + 90 * static_cast<double>(m)) << "\" y=\"" << Px(kTop + kHeight + 32)
      << "\" fill=\"" << color << "\">" << TunerModeName(report.modes[m]) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::vector<std::string> EmitReport(const ExperimentReport& report, ReportFormat format, const std::string& dir) {
  if (report.runs.empty() || report.cells.empty()) throw std::invalid_argument("refusing to emit an empty report");
  // Render everything before touching the filesystem.
  std::vector<std::pair<std::string, std::string>> files;
  switch (format) {
    case ReportFormat::kCsv: {
      files.emplace_back("aggregates.csv", AggregatesCsv(report));
      files.emplace_back("runs.csv", RunsCsv(report));
      const bool both = std::count(report.modes.begin(), report.modes.end(), TunerMode::kBaseline) &&
                        std::count(report.modes.begin(), report.modes.end(), TunerMode::kEnhanced);
      if (both) files.emplace_back("comparison.csv", ComparisonCsv(CompareModes(report)));
      if (!report.studies.empty()) files.emplace_back("study_grid.csv", StudyGridCsv(report.studies));
      break;
    }
    case ReportFormat::kJson:
      files.emplace_back("report.json", ReportJson(report));
      break;
    case ReportFormat::kSvg:
      files.emplace_back("trials_to_best.svg", BoxPlotSvg(report));
      for (const std::string& id : report.workload_ids) {
        files.emplace_back("convergence_" + id + ".svg", ConvergenceSvg(report, id));
      }
      break;
  }
  fs::create_directories(dir);
  std::vector<std::string> written;
  for (const auto& [name, text] : files) {
    const fs::path path = fs::path(dir) / name;
    WriteFile(path, text);
    written.push_back(path.string());
  }
  return written;
}

}  // namespace hatune
