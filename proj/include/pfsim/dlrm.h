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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pfsim/system.h"
#include "pfsim/workload.h"

namespace pfsim {

enum class PlacementMode { distributed_rowwise, shared_fabric };

std::string_view to_string(PlacementMode mode);
PlacementMode parse_placement_mode(std::string_view text);

struct Interconnect {
  std::string name = "nvlink";
  double bandwidth = 450e9;  // bytes/s per direction
  double latency = 1e-6;     // seconds per remote gather message

  static Interconnect nvlink() { return {"nvlink", 450e9, 1e-6}; }
  static Interconnect pcie() { return {"pcie", 64e9, 2e-6}; }
};

struct DlrmPlacement {
  PlacementMode mode = PlacementMode::distributed_rowwise;
  std::int64_t device_count = 1;
  Interconnect interconnect;
  // Remote gathers merged into one message.
  double coalescing = 1;

  void validate() const;
};

/// Devices needed to hold every table, rounded up to a power of two when
/// `power_of_two` is set.
std::int64_t required_devices(const DlrmSpec& spec, double per_device_capacity,
                              bool power_of_two = true);
std::int64_t required_devices(double total_table_bytes, double per_device_capacity,
                              bool power_of_two = true);

struct PoolingTime {
  double local = 0;    // lookups served from the device's own memory
  double remote = 0;   // lookups moved over the interconnect
  double latency = 0;  // per-message costs
  double total = 0;
};

/// Distributed: 1/N of the lookup bytes are local, the rest cross the
/// interconnect, and every remote (sample, table) gather pays one message
/// latency divided by the coalescing factor. Shared fabric: every byte comes
/// from the fabric tier with a single fixed latency per batch.
PoolingTime pooling_time(const DlrmSpec& spec, const DlrmPlacement& placement,
                         const SystemSpec& system);

/// t_reference / t_candidate.
double pooling_speedup(const DlrmSpec& spec, const DlrmPlacement& reference,
                       const SystemSpec& reference_system, const DlrmPlacement& candidate,
                       const SystemSpec& candidate_system);

struct DlrmGrid {
  std::vector<std::int64_t> tables = {1, 2, 4, 8, 16, 32, 64};
  std::vector<std::int64_t> batches = {128, 1024, 4096};
  std::vector<std::int64_t> pooling = {32, 64};
  std::int64_t embed_dim = 32;
  std::int64_t rows_per_table = 1000000;
  int dtype_bytes = 2;
};

struct DlrmRow {
  std::int64_t tables = 0;
  std::int64_t batch = 0;
  std::int64_t pooling = 0;
  double lookup_bytes = 0;
  double reference_time = 0;
  double candidate_time = 0;
  double speedup = 0;
};

std::vector<DlrmRow> dlrm_sweep(const DlrmGrid& grid, const DlrmPlacement& reference,
                                const SystemSpec& reference_system,
                                const DlrmPlacement& candidate,
                                const SystemSpec& candidate_system);

}  // namespace pfsim
