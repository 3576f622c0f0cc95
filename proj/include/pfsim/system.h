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

#include "pfsim/types.h"

namespace pfsim {

struct ProcessorSpec {
  std::map<Dtype, double> peak_matrix_flops;
  double peak_vector_flops = 0;
  std::int64_t count = 1;

  void validate() const;
  /// Throws ValidationError for a dtype with no configured peak.
  double peak_for(Dtype dtype) const;
};

enum class MemoryRole { local_hbm, fabric_shared, host_ddr, external_store };

std::string_view to_string(MemoryRole role);
MemoryRole parse_memory_role(std::string_view text);

struct MemoryTier {
  MemoryRole role = MemoryRole::local_hbm;
  double capacity = 0;   // bytes, per processor
  double bandwidth = 0;  // bytes/s; for fabric tiers this is the cache (HBM) side
  double fixed_latency = 0;
  double cache_hit_rate = 1.0;
  // Bandwidth of the backing store behind a fabric tier's cache. Unset means
  // the backing store matches the cache bandwidth.
  std::optional<double> backing_bandwidth;

  void validate() const;
  /// Raw bandwidth after hit-rate blending (fabric tiers only).
  double blended_bandwidth() const;
};

struct LinkSpec {
  double bandwidth = 0;  // bytes/s per direction
  double latency = 0;    // seconds per message
};

struct NetworkSpec {
  double link_bandwidth = 0;
  double per_message_latency = 0;
  std::int64_t gpus_per_tray = 1;
  std::int64_t trays_per_rack = 1;
  std::int64_t racks = 1;
  // Link used when a communication group spans trays. Defaults to the
  // intra-tray link when unset.
  std::optional<double> scale_out_bandwidth;
  std::optional<double> scale_out_latency;

  void validate() const;
  std::int64_t device_count() const { return gpus_per_tray * trays_per_rack * racks; }
  LinkSpec intra_tray_link() const { return {link_bandwidth, per_message_latency}; }
  LinkSpec scale_out_link() const;
  /// Link for a group whose members, laid out contiguously, span `extent` devices.
  LinkSpec link_for_extent(std::int64_t extent) const;
};

/// Piecewise log-linear utilization curve over transfer size (bytes) or GEMM
/// size (FLOPs). Sizes outside the table clamp to the endpoint utilization;
/// the result is never below `floor`.
class EfficiencyCurve {
 public:
  struct Knot {
    double size;
    double utilization;
  };

  EfficiencyCurve();  // identity: utilization 1 everywhere
  explicit EfficiencyCurve(std::vector<Knot> knots, double floor = 0.0);

  static EfficiencyCurve identity() { return EfficiencyCurve(); }
  /// Two-column CSV with a header row: size,utilization.
  static EfficiencyCurve from_csv_text(std::string_view text, double floor = 0.0);
  static EfficiencyCurve from_csv_file(const std::filesystem::path& path, double floor = 0.0);

  double operator()(double size) const;

  const std::vector<Knot>& knots() const { return knots_; }
  double floor() const { return floor_; }
  bool is_identity() const;
  /// Returns a curve whose utilizations are scaled by `factor`, capped at 1.
  EfficiencyCurve scaled(double factor) const;

 private:
  std::vector<Knot> knots_;
  double floor_ = 0.0;
};

struct SystemSpec {
  std::string name;
  ProcessorSpec processor;
  std::vector<MemoryTier> memory_tiers;
  std::optional<NetworkSpec> network;
  EfficiencyCurve bandwidth_curve;
  EfficiencyCurve flops_curve;

  void validate() const;
  const MemoryTier* find_tier(MemoryRole role) const;
  /// Tier that holds weights and KV cache for inference: the fabric-shared
  /// tier when present, else local HBM, else the first tier.
  const MemoryTier& serving_tier() const;
  /// Tier training keeps its working set in: local HBM when present, else the
  /// serving tier.
  const MemoryTier& local_tier() const;
};

/// Named configurations: "h100-dgx" and "h200-dgx" (eight GPUs on one
/// NVLink tray) and "pfa" (one logical processor with the aggregate compute
/// of eight H100s in front of a 32 TB fabric-shared pool). The efficiency
/// curves are synthetic stand-ins for measured microbenchmarks.
SystemSpec system_preset(std::string_view name);
std::vector<std::string> system_preset_names();

EfficiencyCurve h100_bandwidth_curve();
EfficiencyCurve h200_bandwidth_curve();
EfficiencyCurve hopper_flops_curve();

/// FLOPs per byte at which matrix compute time equals memory time on the
/// serving tier, at peak rates.
double ridge_intensity(const SystemSpec& system, Dtype dtype);

/// Bandwidth achieved by one transfer of `transfer_size` bytes.
double effective_bandwidth(const MemoryTier& tier, double transfer_size,
                           const EfficiencyCurve& curve);

/// Matrix throughput achieved by one GEMM of `gemm_flops` FLOPs.
double effective_flops(const ProcessorSpec& proc, Dtype dtype, double gemm_flops,
                       const EfficiencyCurve& curve);

/// max(compute, memory) + the tier's fixed latency. Vector kernels run at the
/// flat vector peak. Throws ValidationError when both flops and bytes are 0.
double roofline_time(double flops, double bytes, Dtype dtype, const SystemSpec& system,
                     const MemoryTier& tier, ComputeUnit unit = ComputeUnit::matrix);

}  // namespace pfsim
