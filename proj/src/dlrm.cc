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

#include "pfsim/dlrm.h"

#include <cmath>

#include "pfsim/errors.h"

namespace pfsim {

std::string_view to_string(PlacementMode mode) {
  return mode == PlacementMode::distributed_rowwise ? "distributed_rowwise" : "shared_fabric";
}

PlacementMode parse_placement_mode(std::string_view text) {
  if (text == "distributed_rowwise") return PlacementMode::distributed_rowwise;
  if (text == "shared_fabric") return PlacementMode::shared_fabric;
  throw ValidationError("unknown placement mode '" + std::string(text) +
                        "' (expected distributed_rowwise|shared_fabric)");
}

void DlrmPlacement::validate() const {
  if (device_count < 1) throw ValidationError("dlrm placement: device_count must be >= 1");
  if (!(interconnect.bandwidth > 0)) {
    throw ValidationError("dlrm placement: interconnect bandwidth must be > 0");
  }
  if (!(interconnect.latency >= 0)) {
    throw ValidationError("dlrm placement: interconnect latency must be >= 0");
  }
  if (!(coalescing >= 1)) throw ValidationError("dlrm placement: coalescing must be >= 1");
}

std::int64_t required_devices(const DlrmSpec& spec, double capacity, bool power_of_two) {
  spec.validate();
  return required_devices(spec.total_table_bytes(), capacity, power_of_two);
}

std::int64_t required_devices(double total_bytes, double capacity, bool power_of_two) {
  if (!(capacity > 0)) throw ValidationError("dlrm: per-device capacity must be > 0");
  if (!(total_bytes > 0)) throw ValidationError("dlrm: total table bytes must be > 0");
  const auto n = static_cast<std::int64_t>(std::ceil(total_bytes / capacity));
  if (!power_of_two) return n;
  std::int64_t p = 1;
  while (p < n) p *= 2;
  return p;
}

PoolingTime pooling_time(const DlrmSpec& spec, const DlrmPlacement& placement,
                         const SystemSpec& system) {
  placement.validate();
  system.validate();
  const double bytes = dlrm_pooling_bytes(spec);
  PoolingTime t;
  if (placement.mode == PlacementMode::shared_fabric) {
    const MemoryTier* fabric = system.find_tier(MemoryRole::fabric_shared);
    if (!fabric) {
      throw ValidationError("dlrm: shared_fabric placement needs a fabric-shared tier on system '" +
                            system.name + "'");
    }
    t.local = bytes / effective_bandwidth(*fabric, bytes, system.bandwidth_curve);
    t.latency = fabric->fixed_latency;
  } else {
    const MemoryTier& hbm = system.local_tier();
    const double n = static_cast<double>(placement.device_count);
    const double remote_fraction = 1.0 - 1.0 / n;
    const double local_bytes = bytes / n;
    t.local = local_bytes / effective_bandwidth(hbm, local_bytes, system.bandwidth_curve);
    t.remote = bytes * remote_fraction / placement.interconnect.bandwidth;
    const double gathers = static_cast<double>(spec.batch * spec.num_tables) * remote_fraction;
    t.latency = placement.interconnect.latency * gathers / placement.coalescing;
  }
  t.total = t.local + t.remote + t.latency;
  return t;
}

double pooling_speedup(const DlrmSpec& spec, const DlrmPlacement& reference,
                       const SystemSpec& reference_system, const DlrmPlacement& candidate,
                       const SystemSpec& candidate_system) {
  return pooling_time(spec, reference, reference_system).total /
         pooling_time(spec, candidate, candidate_system).total;
}

std::vector<DlrmRow> dlrm_sweep(const DlrmGrid& grid, const DlrmPlacement& reference,
                                const SystemSpec& reference_system,
                                const DlrmPlacement& candidate,
                                const SystemSpec& candidate_system) {
  std::vector<DlrmRow> rows;
  for (std::int64_t tables : grid.tables) {
    for (std::int64_t batch : grid.batches) {
      for (std::int64_t pooling : grid.pooling) {
        DlrmSpec spec{tables, grid.rows_per_table, grid.embed_dim, pooling, grid.dtype_bytes, batch};
        DlrmRow row{tables, batch, pooling, dlrm_pooling_bytes(spec)};
        row.reference_time = pooling_time(spec, reference, reference_system).total;
        row.candidate_time = pooling_time(spec, candidate, candidate_system).total;
        row.speedup = row.reference_time / row.candidate_time;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

}  // namespace pfsim
