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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace pfsim {

inline constexpr std::string_view kToolVersion = "pfsim 0.1.0";

struct Measurement {
  std::string config_id;
  double predicted = 0;  // seconds
  double measured = 0;   // seconds
};

using MeasurementSet = std::vector<Measurement>;

/// Throws ValidationError on an empty set, nonpositive measured values, or
/// duplicate config ids.
void validate_measurements(const MeasurementSet& set);

/// Mean of |predicted - measured| / measured.
double mape(const MeasurementSet& set);

/// 1 - SS_res / SS_tot with measured values as ground truth.
double r_squared(const MeasurementSet& set);

/// CSV with header config_id,measured_s (predicted_s optional and ignored on
/// ingest when the simulator supplies predictions).
MeasurementSet read_measurements_csv(std::string_view text);
MeasurementSet read_measurements_file(const std::filesystem::path& path);

using Cell = std::variant<std::string, std::int64_t, double, bool>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
};

struct RunReport {
  std::string tool_version{kToolVersion};
  std::string mode;
  nlohmann::json config;  // normalized config, every default filled in
  std::vector<Table> tables;
  std::map<std::string, double> metrics;
  std::vector<std::string> warnings;
};

enum class Format { csv, json };

Format parse_format(std::string_view text);

/// Six significant digits, printf %.6g style; "nan"/"inf" spelled out.
std::string format_number(double value);

std::string emit(const RunReport& report, Format format);

/// Throws std::runtime_error when the destination cannot be written.
void write_report(const RunReport& report, Format format, const std::filesystem::path& path);

}  // namespace pfsim
