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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pfsim/dlrm.h"
#include "pfsim/energy.h"
#include "pfsim/inference.h"
#include "pfsim/parallel.h"
#include "pfsim/report.h"
#include "pfsim/system.h"
#include "pfsim/training.h"
#include "pfsim/workload.h"

namespace pfsim {

using Json = nlohmann::json;

enum class Mode { infer, train, power, dlrm, validate, sweep };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

struct InferRun {
  std::string id;
  std::string model;
  std::string system;
  ParallelismPlan plan;
  WorkloadShape shape;
};

struct SpeedupConfig {
  std::vector<std::string> models;
  std::string baseline_system;
  ParallelismPlan baseline_plan;
  std::string candidate_system;
  ParallelismPlan candidate_plan;
  std::vector<LengthPair> lengths;
  std::vector<double> compute_scales;
  std::optional<std::int64_t> batch_cap;
};

struct TpOverheadConfig {
  std::string model;
  std::string system;
  WorkloadShape shape;
  std::vector<std::int64_t> tp;
};

struct IntensityConfig {
  std::string model;
  Phase phase = Phase::decode;
  std::vector<std::int64_t> batches;
  std::vector<std::int64_t> lengths;
};

struct SweepCase {
  std::string id;
  std::string model;
  std::string system;
  ParallelismPlan plan;
};

struct LengthSweep {
  std::string name;
  std::vector<std::int64_t> input_lens;
  std::vector<std::int64_t> output_lens;
};

struct SweepConfig {
  std::vector<SweepCase> cases;
  std::vector<std::int64_t> batches;
  std::vector<LengthSweep> length_sweeps;
};

struct SweepPoint {
  std::size_t index = 0;
  std::string config_id;
  const SweepCase* sweep_case = nullptr;
  WorkloadShape shape;
};

/// Cases x batches x each length sweep's input x output grid, in that
/// nesting order. A point reached by more than one length sweep is listed
/// once, at its first occurrence.
std::vector<SweepPoint> enumerate_sweep(const SweepConfig& sweep);

struct TrainConfig {
  std::string model;
  std::string system;
  TrainOptions options;
  std::optional<ParallelismPlan> plan;
  std::optional<std::int64_t> device_budget;  // search when set
  SearchConstraints search;
};

struct PowerWorkload {
  std::string id;
  std::optional<TrafficLedger> ledger;  // given directly
  std::optional<TrainConfig> train;     // or derived from one training step
  double steps = 1;                     // steps billed
};

struct PowerConfig {
  EnergyModel energy;
  std::vector<PowerWorkload> workloads;
};

struct DlrmConfig {
  std::string reference_system;
  std::string candidate_system;
  DlrmGrid grid;
  double total_table_bytes = 0;
  double per_device_capacity = 0;
  bool power_of_two_devices = true;
  std::vector<Interconnect> interconnects;
  double coalescing = 1;
  std::vector<std::int64_t> device_counts;  // optional scaling table
};

struct RunConfig {
  Mode mode = Mode::infer;
  Json normalized;  // input document with every default filled in
  std::map<std::string, ModelSpec> models;
  std::map<std::string, SystemSpec> systems;
  InferenceOptions infer_options;

  std::vector<InferRun> infer_runs;
  std::optional<SpeedupConfig> speedup;
  std::optional<TpOverheadConfig> tp_overhead;
  std::optional<IntensityConfig> intensity;
  std::optional<SweepConfig> sweep;
  std::optional<std::filesystem::path> measurements;
  std::optional<TrainConfig> train;
  std::optional<PowerConfig> power;
  std::optional<DlrmConfig> dlrm;

  Format format = Format::json;
  std::optional<std::filesystem::path> output;

  const ModelSpec& model(const std::string& id) const;
  const SystemSpec& system(const std::string& id) const;
};

/// Applies "a.b.c=value" to `doc`. The value is read as JSON when it parses,
/// else as a string. Missing objects along the path are created; numeric
/// segments index arrays.
void apply_override(Json& doc, std::string_view assignment);

/// Validates `doc` and fills defaults into a copy kept in
/// RunConfig::normalized. Relative file paths resolve against `base_dir`.
/// Throws ValidationError naming the offending field.
RunConfig parse_config(const Json& doc, const std::filesystem::path& base_dir);

RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {},
                      std::optional<Mode> mode_override = std::nullopt);

Json model_to_json(const ModelSpec& model);
Json system_to_json(const SystemSpec& system);

/// Evaluates the configured mode. Sweep points run on up to `jobs` threads;
/// the report does not depend on `jobs`.
RunReport run(const RunConfig& config, int jobs = 1);

}  // namespace pfsim
