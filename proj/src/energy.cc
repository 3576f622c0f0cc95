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

#include "pfsim/energy.h"

#include <algorithm>
#include <cmath>

#include "pfsim/errors.h"

namespace pfsim {

void EnergyParams::validate() const {
  auto need = [](double v, const char* field) {
    if (!(v >= 0)) throw ValidationError(std::string("energy params: ") + field + " must be >= 0");
  };
  need(adapter, "adapter");
  need(switch_, "switch");
  need(nvlink_intra_tray, "nvlink_intra_tray");
  need(photonic_transceiver, "photonic_transceiver");
  need(photonic_switch, "photonic_switch");
  need(photonic_intra_tray, "photonic_intra_tray");
}

std::string_view to_string(Technology tech) {
  return tech == Technology::electronic ? "electronic" : "photonic";
}

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::intra_tray: return "intra_tray";
    case Scenario::intra_rack: return "intra_rack";
    case Scenario::inter_rack: return "inter_rack";
    case Scenario::offload_tray: return "offload_tray";
    case Scenario::offload_external: return "offload_external";
  }
  return "unknown";
}

Technology parse_technology(std::string_view text) {
  if (text == "electronic") return Technology::electronic;
  if (text == "photonic") return Technology::photonic;
  throw ValidationError("unknown technology '" + std::string(text) +
                        "' (expected electronic|photonic)");
}

Scenario parse_scenario(std::string_view text) {
  for (Scenario s : kScenarios) {
    if (to_string(s) == text) return s;
  }
  throw ValidationError("unknown scenario '" + std::string(text) + "'");
}

namespace {

double endpoint_energy(EndpointKind kind, const EnergyParams& p) {
  switch (kind) {
    case EndpointKind::none: return 0;
    case EndpointKind::adapter: return p.adapter;
    case EndpointKind::photonic_transceiver: return p.photonic_transceiver;
    case EndpointKind::nvlink_intra_tray: return p.nvlink_intra_tray;
    case EndpointKind::photonic_intra_tray: return p.photonic_intra_tray;
  }
  return 0;
}

}  // namespace

double path_energy(const PathProfile& profile, const EnergyParams& params) {
  if (profile.switch_count < 0) throw ValidationError("path: switch_count must be >= 0");
  const double sw =
      profile.switch_kind == SwitchKind::electronic ? params.switch_ : params.photonic_switch;
  return endpoint_energy(profile.source, params) +
         static_cast<double>(profile.switch_count) * sw + endpoint_energy(profile.dest, params);
}

std::int64_t default_switch_count(Scenario scenario, Technology tech) {
  switch (scenario) {
    case Scenario::intra_tray: return 0;
    case Scenario::intra_rack: return 1;
    case Scenario::inter_rack: return 3;
    case Scenario::offload_tray: return tech == Technology::electronic ? 0 : 1;
    case Scenario::offload_external: return tech == Technology::electronic ? 8 : 1;
  }
  return 0;
}

PathProfile scenario_profile(Scenario scenario, Technology tech, const SwitchCounts& overrides,
                             std::vector<std::string>* warnings) {
  const bool electronic = tech == Technology::electronic;
  PathProfile p;
  p.scenario = scenario;
  p.switch_kind = electronic ? SwitchKind::electronic : SwitchKind::photonic;
  p.switch_count = default_switch_count(scenario, tech);
  if (scenario == Scenario::intra_tray) {
    p.source = electronic ? EndpointKind::nvlink_intra_tray : EndpointKind::photonic_intra_tray;
    p.dest = EndpointKind::none;
  } else {
    p.source = p.dest = electronic ? EndpointKind::adapter : EndpointKind::photonic_transceiver;
  }

  auto it = overrides.find(scenario);
  if (it == overrides.end()) return p;
  const std::int64_t n = it->second;
  if (n < 0) {
    throw ValidationError("switch count override for " + std::string(to_string(scenario)) +
                          " must be >= 0");
  }
  p.switch_count = n;
  if (warnings) {
    const std::string where =
        std::string(to_string(tech)) + " " + std::string(to_string(scenario)) + ": ";
    if (scenario == Scenario::intra_tray && n != 0) {
      warnings->push_back(where + "switch count " + std::to_string(n) +
                          " on a direct intra-tray link (expected 0)");
    }
    if (scenario == Scenario::inter_rack && n < 2) {
      warnings->push_back(where + "switch count " + std::to_string(n) +
                          " is below the 2 needed to leave a rack");
    }
    if (scenario == Scenario::offload_external && electronic && (n < 4 || n > 12)) {
      warnings->push_back(where + "switch count " + std::to_string(n) +
                          " is outside the typical 4..12 range");
    }
  }
  return p;
}

ScenarioMix ScenarioMix::defaults() {
  ScenarioMix m;
  m.weights[TrafficClass::tp_comm] = {{Scenario::intra_tray, 1.0}};
  m.weights[TrafficClass::pp_comm] = {{Scenario::intra_rack, 1.0}};
  m.weights[TrafficClass::dp_comm] = {{Scenario::inter_rack, 1.0}};
  m.weights[TrafficClass::offload_tray] = {{Scenario::offload_tray, 1.0}};
  m.weights[TrafficClass::offload_external] = {{Scenario::offload_external, 1.0}};
  return m;
}

void ScenarioMix::validate() const {
  for (TrafficClass cls : kTrafficClasses) {
    auto it = weights.find(cls);
    const std::string name(to_string(cls));
    if (it == weights.end() || it->second.empty()) {
      throw ValidationError("scenario mix: no weights for class " + name);
    }
    double sum = 0;
    for (const auto& [scenario, w] : it->second) {
      if (!(w >= 0)) {
        throw ValidationError("scenario mix: " + name + "." + std::string(to_string(scenario)) +
                              " weight must be >= 0");
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ValidationError("scenario mix: weights for " + name + " sum to " +
                            std::to_string(sum) + ", expected 1");
    }
  }
}

double expected_per_bit(const ScenarioMix& mix, TrafficClass cls, Technology tech,
                        const EnergyParams& params, const SwitchCounts& overrides,
                        std::vector<std::string>* warnings) {
  mix.validate();
  params.validate();
  double e = 0;
  for (const auto& [scenario, w] : mix.weights.at(cls)) {
    if (w == 0) continue;
    e += w * path_energy(scenario_profile(scenario, tech, overrides, warnings), params);
  }
  return e;
}

EnergyReport workload_energy(const TrafficLedger& ledger, const EnergyModel& model) {
  constexpr double kJoulesPerPicojoule = 1e-12;
  EnergyReport report;
  std::vector<std::string> warnings;
  for (TrafficClass cls : kTrafficClasses) {
    if (!(ledger[cls] >= 0)) throw ValidationError("traffic ledger bits must be >= 0");
    EnergyRow row;
    row.cls = cls;
    row.bits = ledger[cls];
    row.baseline_pj_per_bit = expected_per_bit(model.mix, cls, Technology::electronic,
                                               model.baseline, model.baseline_switches, &warnings);
    row.photonic_pj_per_bit = expected_per_bit(model.mix, cls, Technology::photonic,
                                               model.photonic, model.photonic_switches, &warnings);
    row.baseline_joules = row.bits * row.baseline_pj_per_bit * kJoulesPerPicojoule;
    row.photonic_joules = row.bits * row.photonic_pj_per_bit * kJoulesPerPicojoule;
    if (row.baseline_pj_per_bit > 0) {
      row.remaining = row.photonic_pj_per_bit / row.baseline_pj_per_bit;
      row.savings = 1.0 - row.remaining;
    } else {
      row.remaining = 1.0;
    }
    report.baseline_joules += row.baseline_joules;
    report.photonic_joules += row.photonic_joules;
    report.rows.push_back(row);
  }
  if (report.baseline_joules > 0) {
    report.savings = 1.0 - report.photonic_joules / report.baseline_joules;
  }
  // Each override is visited once per class; keep one copy of each message.
  std::sort(warnings.begin(), warnings.end());
  warnings.erase(std::unique(warnings.begin(), warnings.end()), warnings.end());
  report.warnings = std::move(warnings);
  return report;
}

}  // namespace pfsim
