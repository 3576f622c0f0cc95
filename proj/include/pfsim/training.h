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
#include <optional>
#include <string>

#include "pfsim/inference.h"
#include "pfsim/parallel.h"
#include "pfsim/system.h"
#include "pfsim/workload.h"

namespace pfsim {

struct TrainOptions {
  std::int64_t seq_len = 2048;
  bool recompute_activations = false;
  bool mixed_precision = true;
  // Adam state bytes per parameter: fp32 master + two fp32 moments under
  // mixed precision, two moments otherwise.
  double optimizer_bytes_mixed = 12;
  double optimizer_bytes_full = 8;
  double tp_training_passes = 3;
  CostOptions cost;
};

/// Per-device bytes.
struct TrainMemoryBreakdown {
  double params = 0;
  double gradients = 0;
  double optimizer_states = 0;
  double activations = 0;

  double total() const { return params + gradients + optimizer_states + activations; }
};

/// Activation bytes one layer keeps for backward, per microbatch, per device.
double activation_bytes_per_layer(const ModelSpec& model, std::int64_t microbatch,
                                  std::int64_t seq_len, std::int64_t tp, bool recompute);

TrainMemoryBreakdown train_memory(const ModelSpec& model, const ParallelismPlan& plan,
                                  const TrainOptions& options = {});

struct OffloadPlan {
  double excess_bytes = 0;    // per device
  double bytes_per_step = 0;  // per device: one eviction and one fetch
  std::optional<MemoryRole> destination;
  TrafficClass traffic_class = TrafficClass::offload_tray;
};

/// Spills whatever exceeds the local tier to the fabric-shared tier, then
/// host DDR (both billed as offload_tray), then an external store
/// (offload_external). Throws SimulationError when memory overflows and no
/// such tier exists.
OffloadPlan offload_volume(const ModelSpec& model, const ParallelismPlan& plan,
                           const SystemSpec& system, const TrainOptions& options = {});

struct TrainStepResult {
  ParallelismPlan plan;
  double step_time = 0;
  double stage_time = 0;  // one microbatch, forward + backward, one stage
  double pipeline_time = 0;
  double dp_comm_time = 0;  // exposed DP all-reduce (0 when overlapped)
  double offload_time = 0;
  double mfu = 0;
  double bubble_fraction = 0;
  double model_flops = 0;  // 3 x forward matmul FLOPs over the global batch
  TimingBreakdown breakdown;  // per step; dp time is reported separately
  TrafficLedger ledger;       // whole job, one step
  TrainMemoryBreakdown memory;
  OffloadPlan offload;
};

/// One synchronous step over plan.global_batch() sequences of
/// options.seq_len tokens with a 1F1B pipeline schedule.
TrainStepResult train_step_time(const ModelSpec& model, const SystemSpec& system,
                                const ParallelismPlan& plan, const TrainOptions& options = {});

struct SearchConstraints {
  std::int64_t global_batch = 1;
  std::int64_t max_microbatch = 16;
  bool sequence_parallel = false;
  bool dp_overlap = false;
  TrainOptions options;
};

/// Orders plans best-first: higher MFU, then smaller tp, pp, microbatch.
bool plan_better(const TrainStepResult& a, const TrainStepResult& b);

/// Exhaustive search over tp x pp x dp = device_budget (tp within one tray,
/// pp dividing the layer count, dp dividing the global batch) and every
/// microbatch size dividing the per-replica batch. Throws SimulationError
/// naming the binding constraint when nothing is feasible.
TrainStepResult search_plan(const ModelSpec& model, const SystemSpec& system,
                            std::int64_t device_budget, const SearchConstraints& constraints);

}  // namespace pfsim
