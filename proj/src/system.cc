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

#include "pfsim/system.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pfsim/errors.h"

namespace pfsim {

void ProcessorSpec::validate() const {
  if (peak_matrix_flops.empty()) {
    throw ValidationError("processor: peak_matrix_flops needs at least one dtype");
  }
  for (const auto& [dtype, peak] : peak_matrix_flops) {
    if (!(peak > 0)) {
      throw ValidationError("processor: peak_matrix_flops." + std::string(to_string(dtype)) +
                            " must be > 0");
    }
  }
  if (!(peak_vector_flops > 0)) throw ValidationError("processor: peak_vector_flops must be > 0");
  if (count < 1) throw ValidationError("processor: count must be >= 1");
}

double ProcessorSpec::peak_for(Dtype dtype) const {
  auto it = peak_matrix_flops.find(dtype);
  if (it == peak_matrix_flops.end()) {
    throw ValidationError("processor: no matrix peak configured for dtype " +
                          std::string(to_string(dtype)));
  }
  return it->second;
}

std::string_view to_string(MemoryRole role) {
  switch (role) {
    case MemoryRole::local_hbm: return "local-hbm";
    case MemoryRole::fabric_shared: return "fabric-shared";
    case MemoryRole::host_ddr: return "host-ddr";
    case MemoryRole::external_store: return "external-store";
  }
  return "unknown";
}

MemoryRole parse_memory_role(std::string_view text) {
  if (text == "local-hbm") return MemoryRole::local_hbm;
  if (text == "fabric-shared") return MemoryRole::fabric_shared;
  if (text == "host-ddr") return MemoryRole::host_ddr;
  if (text == "external-store") return MemoryRole::external_store;
  throw ValidationError("unknown memory role '" + std::string(text) +
                        "' (expected local-hbm|fabric-shared|host-ddr|external-store)");
}

void MemoryTier::validate() const {
  const std::string where = "memory tier " + std::string(to_string(role)) + ": ";
  if (!(capacity > 0)) throw ValidationError(where + "capacity must be > 0");
  if (!(bandwidth > 0)) throw ValidationError(where + "bandwidth must be > 0");
  if (!(fixed_latency >= 0)) throw ValidationError(where + "fixed_latency must be >= 0");
  if (!(cache_hit_rate >= 0 && cache_hit_rate <= 1)) {
    throw ValidationError(where + "cache_hit_rate must be in [0, 1]");
  }
  if (backing_bandwidth && !(*backing_bandwidth > 0)) {
    throw ValidationError(where + "backing_bandwidth must be > 0");
  }
}

double MemoryTier::blended_bandwidth() const {
  if (role != MemoryRole::fabric_shared) return bandwidth;
  const double backing = backing_bandwidth.value_or(bandwidth);
  return cache_hit_rate * bandwidth + (1.0 - cache_hit_rate) * backing;
}

void NetworkSpec::validate() const {
  if (!(link_bandwidth > 0)) throw ValidationError("network: link_bandwidth must be > 0");
  if (!(per_message_latency >= 0)) {
    throw ValidationError("network: per_message_latency must be >= 0");
  }
  if (gpus_per_tray < 1) throw ValidationError("network: gpus_per_tray must be >= 1");
  if (trays_per_rack < 1) throw ValidationError("network: trays_per_rack must be >= 1");
  if (racks < 1) throw ValidationError("network: racks must be >= 1");
  if (scale_out_bandwidth && !(*scale_out_bandwidth > 0)) {
    throw ValidationError("network: scale_out_bandwidth must be > 0");
  }
  if (scale_out_latency && !(*scale_out_latency >= 0)) {
    throw ValidationError("network: scale_out_latency must be >= 0");
  }
}

LinkSpec NetworkSpec::scale_out_link() const {
  return {scale_out_bandwidth.value_or(link_bandwidth),
          scale_out_latency.value_or(per_message_latency)};
}

LinkSpec NetworkSpec::link_for_extent(std::int64_t extent) const {
  return extent <= gpus_per_tray ? intra_tray_link() : scale_out_link();
}

EfficiencyCurve::EfficiencyCurve() : knots_{{1.0, 1.0}}, floor_(0.0) {}

EfficiencyCurve::EfficiencyCurve(std::vector<Knot> knots, double floor)
    : knots_(std::move(knots)), floor_(floor) {
  if (knots_.empty()) throw ValidationError("efficiency curve: needs at least one point");
  if (!(floor_ >= 0 && floor_ <= 1)) {
    throw ValidationError("efficiency curve: floor must be in [0, 1]");
  }
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    const Knot& k = knots_[i];
    if (!(k.size > 0)) throw ValidationError("efficiency curve: sizes must be > 0");
    if (!(k.utilization > 0 && k.utilization <= 1)) {
      throw ValidationError("efficiency curve: utilizations must be in (0, 1]");
    }
    if (i > 0 && !(k.size > knots_[i - 1].size)) {
      throw ValidationError("efficiency curve: sizes must be strictly increasing");
    }
  }
}

EfficiencyCurve EfficiencyCurve::from_csv_text(std::string_view text, double floor) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<Knot> knots;
  bool header = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ValidationError("calibration CSV line " + std::to_string(line_no) +
                            ": expected 'size,utilization'");
    }
    try {
      std::size_t used = 0;
      const std::string size_text = line.substr(0, comma);
      const std::string util_text = line.substr(comma + 1);
      const double size = std::stod(size_text, &used);
      const double util = std::stod(util_text);
      knots.push_back({size, util});
    } catch (const std::logic_error&) {
      throw ValidationError("calibration CSV line " + std::to_string(line_no) +
                            ": unparsable number");
    }
  }
  if (header) throw ValidationError("calibration CSV: missing header row");
  return EfficiencyCurve(std::move(knots), floor);
}

EfficiencyCurve EfficiencyCurve::from_csv_file(const std::filesystem::path& path, double floor) {
  std::ifstream in(path);
  if (!in) throw ValidationError("calibration CSV: cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_csv_text(buffer.str(), floor);
}

double EfficiencyCurve::operator()(double size) const {
  double u;
  if (size <= knots_.front().size) {
    u = knots_.front().utilization;
  } else if (size >= knots_.back().size) {
    u = knots_.back().utilization;
  } else {
    auto hi = std::upper_bound(knots_.begin(), knots_.end(), size,
                               [](double v, const Knot& k) { return v < k.size; });
    auto lo = hi - 1;
    const double t = std::log(size / lo->size) / std::log(hi->size / lo->size);
    u = lo->utilization + (hi->utilization - lo->utilization) * t;
  }
  return std::max(u, floor_);
}

bool EfficiencyCurve::is_identity() const {
  return std::all_of(knots_.begin(), knots_.end(),
                     [](const Knot& k) { return k.utilization == 1.0; });
}

EfficiencyCurve EfficiencyCurve::scaled(double factor) const {
  std::vector<Knot> out = knots_;
  for (Knot& k : out) k.utilization = std::min(1.0, k.utilization * factor);
  return EfficiencyCurve(std::move(out), std::min(1.0, floor_ * factor));
}

void SystemSpec::validate() const {
  processor.validate();
  if (memory_tiers.empty()) {
    throw ValidationError("system '" + name + "': at least one memory tier is required");
  }
  std::map<MemoryRole, int> seen;
  for (const MemoryTier& tier : memory_tiers) {
    tier.validate();
    if (++seen[tier.role] > 1) {
      throw ValidationError("system '" + name + "': more than one " +
                            std::string(to_string(tier.role)) + " tier");
    }
  }
  if (network) {
    network->validate();
    if (network->device_count() < processor.count) {
      throw ValidationError("system '" + name +
                            "': network topology holds fewer devices than processor.count");
    }
  }
}

const MemoryTier* SystemSpec::find_tier(MemoryRole role) const {
  for (const MemoryTier& tier : memory_tiers) {
    if (tier.role == role) return &tier;
  }
  return nullptr;
}

const MemoryTier& SystemSpec::serving_tier() const {
  if (const MemoryTier* t = find_tier(MemoryRole::fabric_shared)) return *t;
  if (const MemoryTier* t = find_tier(MemoryRole::local_hbm)) return *t;
  if (memory_tiers.empty()) throw ValidationError("system '" + name + "' has no memory tier");
  return memory_tiers.front();
}

const MemoryTier& SystemSpec::local_tier() const {
  if (const MemoryTier* t = find_tier(MemoryRole::local_hbm)) return *t;
  return serving_tier();
}

double effective_bandwidth(const MemoryTier& tier, double transfer_size,
                           const EfficiencyCurve& curve) {
  return tier.blended_bandwidth() * curve(transfer_size);
}

double effective_flops(const ProcessorSpec& proc, Dtype dtype, double gemm_flops,
                       const EfficiencyCurve& curve) {
  return proc.peak_for(dtype) * curve(gemm_flops);
}

double roofline_time(double flops, double bytes, Dtype dtype, const SystemSpec& system,
                     const MemoryTier& tier, ComputeUnit unit) {
  if (flops < 0 || bytes < 0) throw ValidationError("roofline: flops and bytes must be >= 0");
  if (flops == 0 && bytes == 0) throw ValidationError("roofline: flops and bytes are both zero");
  double compute = 0;
  if (flops > 0) {
    const double rate = unit == ComputeUnit::matrix
                            ? effective_flops(system.processor, dtype, flops, system.flops_curve)
                            : system.processor.peak_vector_flops;
    compute = flops / rate;
  }
  const double memory =
      bytes > 0 ? bytes / effective_bandwidth(tier, bytes, system.bandwidth_curve) : 0.0;
  return std::max(compute, memory) + tier.fixed_latency;
}

EfficiencyCurve h100_bandwidth_curve() {
  return EfficiencyCurve({{1024, 0.10}, {65536, 0.45}, {4194304, 0.85}, {268435456, 0.92}});
}

EfficiencyCurve h200_bandwidth_curve() { return h100_bandwidth_curve().scaled(0.95); }

EfficiencyCurve hopper_flops_curve() {
  return EfficiencyCurve({{1e6, 0.10}, {1e9, 0.50}, {1e11, 0.80}, {1e13, 0.85}});
}

namespace {

SystemSpec dgx(std::string name, double hbm_capacity, double hbm_bandwidth,
               EfficiencyCurve bandwidth_curve) {
  SystemSpec s;
  s.name = std::move(name);
  s.processor.peak_matrix_flops = {
      {Dtype::fp8, 1979e12}, {Dtype::fp16, 989e12}, {Dtype::bf16, 989e12}, {Dtype::fp32, 494e12}};
  s.processor.peak_vector_flops = 67e12;
  s.processor.count = 8;
  s.memory_tiers.push_back({MemoryRole::local_hbm, hbm_capacity, hbm_bandwidth, 2e-6, 1.0, {}});
  NetworkSpec net;
  net.link_bandwidth = 450e9;
  net.per_message_latency = 1e-6;
  net.gpus_per_tray = 8;
  net.scale_out_bandwidth = 50e9;
  net.scale_out_latency = 5e-6;
  s.network = net;
  s.bandwidth_curve = std::move(bandwidth_curve);
  s.flops_curve = hopper_flops_curve();
  return s;
}

}  // namespace

SystemSpec system_preset(std::string_view name) {
  if (name == "h100-dgx") return dgx("h100-dgx", 80e9, 3350e9, h100_bandwidth_curve());
  if (name == "h200-dgx") return dgx("h200-dgx", 141e9, 4800e9, h200_bandwidth_curve());
  if (name == "pfa") {
    SystemSpec s = dgx("pfa", 80e9, 3350e9, h100_bandwidth_curve());
    for (auto& [dtype, peak] : s.processor.peak_matrix_flops) peak *= 8;
    s.processor.peak_vector_flops *= 8;
    s.processor.count = 1;
    s.memory_tiers = {{MemoryRole::fabric_shared, 32e12, 26800e9, 2e-6, 1.0, {}}};
    s.network.reset();
    return s;
  }
  throw ValidationError("unknown system preset '" + std::string(name) +
                        "' (expected h100-dgx|h200-dgx|pfa)");
}

std::vector<std::string> system_preset_names() { return {"h100-dgx", "h200-dgx", "pfa"}; }

double ridge_intensity(const SystemSpec& system, Dtype dtype) {
  return system.processor.peak_for(dtype) / system.serving_tier().blended_bandwidth();
}

}  // namespace pfsim
