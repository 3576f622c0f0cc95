/* Copyright 2026 The pfsim Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pfsim/report.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "pfsim/errors.h"

namespace pfsim {

void validate_measurements(const MeasurementSet& set) {
  if (set.empty()) throw ValidationError("measurement set is empty");
  std::set<std::string> ids;
  for (const Measurement& m : set) {
    if (!(m.measured > 0)) {
      throw ValidationError("measurement '" + m.config_id + "': measured_s must be > 0");
    }
    if (!ids.insert(m.config_id).second) {
      throw ValidationError("measurement '" + m.config_id + "' appears more than once");
    }
  }
}

double mape(const MeasurementSet& set) {
  validate_measurements(set);
  double sum = 0;
  for (const Measurement& m : set) sum += std::abs(m.predicted - m.measured) / m.measured;
  return sum / static_cast<double>(set.size());
}

double r_squared(const MeasurementSet& set) {
  validate_measurements(set);
  if (set.size() < 2) throw ValidationError("r_squared needs at least 2 measurements");
  double mean = 0;
  for (const Measurement& m : set) mean += m.measured;
  mean /= static_cast<double>(set.size());
  double ss_res = 0;
  double ss_tot = 0;
  for (const Measurement& m : set) {
    ss_res += (m.measured - m.predicted) * (m.measured - m.predicted);
    ss_tot += (m.measured - mean) * (m.measured - mean);
  }
  if (ss_tot == 0) throw ValidationError("r_squared: measured values have zero variance");
  return 1.0 - ss_res / ss_tot;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t");
    const auto e = cell.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw ValidationError("measurement CSV line " + std::to_string(line_no) + ": '" + text +
                        "' is not a number");
}

}  // namespace

MeasurementSet read_measurements_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  int id_col = -1, pred_col = -1, meas_col = -1;
  std::size_t width = 0;
  MeasurementSet set;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (id_col < 0) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i] == "config_id") id_col = static_cast<int>(i);
        if (cells[i] == "predicted_s") pred_col = static_cast<int>(i);
        if (cells[i] == "measured_s") meas_col = static_cast<int>(i);
      }
      if (id_col < 0 || meas_col < 0) {
        throw ValidationError("measurement CSV header must contain config_id and measured_s");
      }
      width = cells.size();
      continue;
    }
    if (cells.size() != width) {
      throw ValidationError("measurement CSV line " + std::to_string(line_no) + ": expected " +
                            std::to_string(width) + " columns");
    }
    Measurement m;
    m.config_id = cells[id_col];
    m.measured = parse_double(cells[meas_col], line_no);
    if (pred_col >= 0 && !cells[pred_col].empty()) {
      m.predicted = parse_double(cells[pred_col], line_no);
    }
    set.push_back(std::move(m));
  }
  if (id_col < 0) throw ValidationError("measurement CSV has no header row");
  validate_measurements(set);
  return set;
}

MeasurementSet read_measurements_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read measurement file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return read_measurements_csv(buffer.str());
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw std::logic_error("table '" + name + "': row width does not match columns");
  }
  rows.push_back(std::move(row));
}

Format parse_format(std::string_view text) {
  if (text == "csv") return Format::csv;
  if (text == "json") return Format::json;
  throw ValidationError("unknown format '" + std::string(text) + "' (expected csv|json)");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& cell) {
  struct Visitor {
    std::string operator()(const std::string& s) const { return csv_escape(s); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
  };
  return std::visit(Visitor{}, cell);
}

nlohmann::ordered_json number_json(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::strtod(format_number(v).c_str(), nullptr);
}

nlohmann::ordered_json cell_json(const Cell& cell) {
  struct Visitor {
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
    nlohmann::ordered_json operator()(std::int64_t v) const { return v; }
    nlohmann::ordered_json operator()(double v) const { return number_json(v); }
    nlohmann::ordered_json operator()(bool v) const { return v; }
  };
  return std::visit(Visitor{}, cell);
}

std::string emit_csv(const RunReport& r) {
  std::ostringstream out;
  out << "# " << r.tool_version << "\n";
  out << "# mode: " << r.mode << "\n";
  out << "# config: " << r.config.dump() << "\n";
  for (const std::string& w : r.warnings) out << "# warning: " << w << "\n";
  for (const Table& t : r.tables) {
    out << "\n# table: " << t.name << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      out << (i ? "," : "") << csv_escape(t.columns[i]);
    }
    out << "\n";
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << cell_text(row[i]);
      out << "\n";
    }
  }
  if (!r.metrics.empty()) {
    out << "\n# table: metrics\nmetric,value\n";
    for (const auto& [name, value] : r.metrics) out << name << "," << format_number(value) << "\n";
  }
  return out.str();
}

std::string emit_json(const RunReport& r) {
  nlohmann::ordered_json doc;
  doc["tool_version"] = r.tool_version;
  doc["mode"] = r.mode;
  doc["config"] = nlohmann::ordered_json::parse(r.config.dump());
  doc["warnings"] = r.warnings;
  nlohmann::ordered_json tables = nlohmann::ordered_json::array();
  for (const Table& t : r.tables) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
      nlohmann::ordered_json cells = nlohmann::ordered_json::array();
      for (const Cell& c : row) cells.push_back(cell_json(c));
      rows.push_back(std::move(cells));
    }
    tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", std::move(rows)}});
  }
  doc["tables"] = std::move(tables);
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  for (const auto& [name, value] : r.metrics) metrics[name] = number_json(value);
  doc["metrics"] = std::move(metrics);
  return doc.dump(2) + "\n";
}

}  // namespace

std::string emit(const RunReport& report, Format format) {
  return format == Format::csv ? emit_csv(report) : emit_json(report);
}

void write_report(const RunReport& report, Format format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << emit(report, format);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace pfsim
