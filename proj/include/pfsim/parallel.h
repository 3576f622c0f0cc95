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
#include <string_view>

#include "pfsim/system.h"
#include "pfsim/workload.h"

namespace pfsim {

struct ParallelismPlan {
  std::int64_t tp = 1;
  std::int64_t pp = 1;
  std::int64_t dp = 1;
  std::int64_t microbatch = 1;
  std::int64_t num_microbatches = 1;
  bool sequence_parallel = false;
  bool dp_overlap = false;

  void validate() const;
  std::int64_t devices() const { return tp * pp * dp; }
  std::int64_t global_batch() const { return dp * num_microbatches * microbatch; }
};

/// Throws ValidationError naming the model dimension that `plan` cannot split:
/// num_layers by pp, num_heads and ffn_size by tp, and num_kv_heads when
/// neither it nor tp divides the other.
void check_shardable(const ModelSpec& model, const ParallelismPlan& plan);

/// Number of ways the KV cache is split across a TP group. KV heads are
/// replicated when tp exceeds num_kv_heads.
std::int64_t kv_shard_factor(const ModelSpec& model, std::int64_t tp);

struct ShardSizes {
  double weight_bytes = 0;                 // per device
  double kv_bytes = 0;                     // per device, batch x (input + output) tokens
  double replicated_activation_bytes = 0;  // per device: layer input/output at full size
  double tp_group_activation_bytes = 0;    // summed over the TP group's ranks
};

/// Per-device footprint of a TP x PP shard. Weights and KV are divided among
/// ranks; the layer input/output tensors every TP rank touches are reported
/// at full size, which is the redundant traffic a single large-memory
/// processor avoids.
ShardSizes shard_sizes(const ModelSpec& model, const ParallelismPlan& plan,
                       const WorkloadShape& shape);

/// Ring all-reduce: 2(n-1) steps, each moving bytes/n and paying one message
/// latency. Zero for n == 1.
double allreduce_time(double bytes, std::int64_t group_size, const LinkSpec& link);
double allreduce_time(double bytes, std::int64_t group_size, const NetworkSpec& net);

double p2p_time(double bytes, const LinkSpec& link);
double p2p_time(double bytes, const NetworkSpec& net);

struct PipelineTiming {
  double total = 0;
  double bubble_fraction = 0;
};

/// 1F1B pipeline makespan for `m` microbatches over `p` stages, each
/// microbatch costing `stage_time` per stage (forward + backward).
PipelineTiming pipeline_time(double stage_time, std::int64_t p, std::int64_t m);

enum class TrafficClass { tp_comm, pp_comm, dp_comm, offload_tray, offload_external };

inline constexpr std::array<TrafficClass, 5> kTrafficClasses = {
    TrafficClass::tp_comm, TrafficClass::pp_comm, TrafficClass::dp_comm,
    TrafficClass::offload_tray, TrafficClass::offload_external};

std::string_view to_string(TrafficClass cls);
TrafficClass parse_traffic_class(std::string_view text);

/// Bits moved per communication class.
struct TrafficLedger {
  double tp_comm = 0;
  double pp_comm = 0;
  double dp_comm = 0;
  double offload_tray = 0;
  double offload_external = 0;

  double& operator[](TrafficClass cls);
  double operator[](TrafficClass cls) const;
  double total() const { return tp_comm + pp_comm + dp_comm + offload_tray + offload_external; }
  TrafficLedger& operator+=(const TrafficLedger& other);
  TrafficLedger scaled(double factor) const;
};

struct TrafficRequest {
  Phase phase = Phase::prefill;
  // Tokens pushed through the model across all data-parallel replicas.
  double tokens_processed = 0;
  // Sequence length of one training sample; sets steps = tokens / (global batch x seq_len).
  std::int64_t seq_len = 1;
  double offload_bytes = 0;
  TrafficClass offload_class = TrafficClass::offload_tray;
  // All-reduce-equivalent TP volumes per layer in training (forward, input
  // grad, weight grad).
  double tp_training_passes = 3;
};

/// Payload-volume ledger. TP: two all-reduces of the layer activation per
/// layer per pass. PP: boundary activation per pipeline edge (forward and
/// backward in training). DP: every device's gradient shard once per
/// training step when dp > 1.
TrafficLedger traffic_ledger(const ModelSpec& model, const ParallelismPlan& plan,
                             const TrafficRequest& request);

}  // namespace pfsim
