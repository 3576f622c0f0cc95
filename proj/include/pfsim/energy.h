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

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pfsim/parallel.h"

namespace pfsim {

/// Per-bit energy costs in pJ/bit.
struct EnergyParams {
  double adapter = 65;
  double switch_ = 35;
  double nvlink_intra_tray = 50;
  double photonic_transceiver = 5;
  double photonic_switch = 25;
  double photonic_intra_tray = 10;

  void validate() const;
};

enum class Technology { electronic, photonic };

enum class Scenario { intra_tray, intra_rack, inter_rack, offload_tray, offload_external };

inline constexpr std::array<Scenario, 5> kScenarios = {
    Scenario::intra_tray, Scenario::intra_rack, Scenario::inter_rack, Scenario::offload_tray,
    Scenario::offload_external};

std::string_view to_string(Technology tech);
std::string_view to_string(Scenario scenario);
Technology parse_technology(std::string_view text);
Scenario parse_scenario(std::string_view text);

enum class EndpointKind { none, adapter, photonic_transceiver, nvlink_intra_tray, photonic_intra_tray };
enum class SwitchKind { electronic, photonic };

struct PathProfile {
  Scenario scenario = Scenario::intra_rack;
  EndpointKind source = EndpointKind::adapter;
  std::int64_t switch_count = 0;
  SwitchKind switch_kind = SwitchKind::electronic;
  EndpointKind dest = EndpointKind::adapter;
};

/// E = E_source + N x E_switch + E_dest, in pJ/bit.
double path_energy(const PathProfile& profile, const EnergyParams& params);

/// Switch-count overrides per scenario.
using SwitchCounts = std::map<Scenario, std::int64_t>;

/// Default switch count for a scenario under a technology.
std::int64_t default_switch_count(Scenario scenario, Technology tech);

/// Builds the path for a scenario. Overrides outside the documented ranges
/// are honored and described in `warnings` when it is non-null.
PathProfile scenario_profile(Scenario scenario, Technology tech,
                             const SwitchCounts& overrides = {},
                             std::vector<std::string>* warnings = nullptr);

/// Probability weights over scenarios for each traffic class.
struct ScenarioMix {
  std::map<TrafficClass, std::map<Scenario, double>> weights;

  /// tp -> intra_tray, pp -> intra_rack, dp -> inter_rack, offload classes
  /// to their own scenarios.
  static ScenarioMix defaults();
  /// Throws ValidationError when a class is missing, a weight is negative,
  /// or a class's weights do not sum to 1 within 1e-9.
  void validate() const;
};

double expected_per_bit(const ScenarioMix& mix, TrafficClass cls, Technology tech,
                        const EnergyParams& params, const SwitchCounts& overrides = {},
                        std::vector<std::string>* warnings = nullptr);

struct EnergyModel {
  EnergyParams baseline;  // electronic paths read adapter/switch/nvlink values
  EnergyParams photonic;  // photonic paths read transceiver/switch/intra-tray values
  ScenarioMix mix = ScenarioMix::defaults();
  SwitchCounts baseline_switches;
  SwitchCounts photonic_switches;
};

struct EnergyRow {
  TrafficClass cls = TrafficClass::tp_comm;
  double bits = 0;
  double baseline_pj_per_bit = 0;
  double photonic_pj_per_bit = 0;
  double baseline_joules = 0;
  double photonic_joules = 0;
  // Per-bit ratios, so they are defined even for a class that moved no bits.
  double savings = 0;    // 1 - photonic / baseline; 0 when the baseline costs nothing
  double remaining = 0;  // photonic / baseline; 1 when the baseline costs nothing
};

struct EnergyReport {
  std::vector<EnergyRow> rows;  // one per traffic class, fixed order
  double baseline_joules = 0;
  double photonic_joules = 0;
  double savings = 0;
  std::vector<std::string> warnings;
};

EnergyReport workload_energy(const TrafficLedger& ledger, const EnergyModel& model = {});

}  // namespace pfsim
