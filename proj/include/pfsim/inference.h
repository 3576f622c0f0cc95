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
#include <span>
#include <string>
#include <vector>

#include "pfsim/parallel.h"
#include "pfsim/system.h"
#include "pfsim/workload.h"

namespace pfsim {

/// Seconds per operation category.
struct TimingBreakdown {
  double gemm = 0;
  double attention = 0;
  double norm_residual_other = 0;
  double tp_comm = 0;
  double pp_comm = 0;
  double memory_offload = 0;

  double total() const {
    return gemm + attention + norm_residual_other + tp_comm + pp_comm + memory_offload;
  }
  TimingBreakdown& operator+=(const TimingBreakdown& other);
  TimingBreakdown scaled(double factor) const;
};

struct InferenceOptions {
  CostOptions cost;
  // Fraction of serving-tier capacity held back for activations, workspace
  // and fragmentation.
  double reserve_fraction = 0.0;
  // Reject batches above max_batch with BatchOverflowError.
  bool enforce_memory = true;
};

struct InferenceResult {
  std::int64_t batch = 0;
  std::int64_t max_batch = 0;
  double prefill_time = 0;
  double decode_time = 0;
  double e2e_latency = 0;
  double throughput = 0;  // output tokens/s
  double mfu = 0;
  double model_flops = 0;  // matmul FLOPs over prefill and every decode step
  TimingBreakdown prefill;
  TimingBreakdown decode;
  TimingBreakdown breakdown;  // prefill + decode
};

/// Matrix dtype used for `model`: fp8 for 1-byte weights, bf16 or fp16 for
/// 2-byte weights (whichever the processor lists, bf16 first), fp32 for 4.
Dtype compute_dtype(const ModelSpec& model, const ProcessorSpec& processor);

/// Per-device roofline time of one kernel under tensor parallelism `tp`.
/// Matrix FLOPs, weights and attention scratch split by tp; KV splits by
/// kv_shard_factor; norm/residual work and layer activations stay
/// replicated. `work_multiplier` scales FLOPs and bytes together (backward
/// passes).
double sharded_kernel_time(const Kernel& kernel, const ModelSpec& model,
                           const SystemSpec& system, const MemoryTier& tier, std::int64_t tp,
                           double work_multiplier = 1.0);

/// Adds `seconds` to the category `kind` belongs to.
void charge(TimingBreakdown& timing, KernelKind kind, double seconds);

/// Two all-reduces of tokens x hidden activations across the TP group.
double tp_layer_comm_time(const ModelSpec& model, const SystemSpec& system, std::int64_t tp,
                          double tokens);

/// Activation hand-off between adjacent pipeline stages.
double pp_boundary_time(const ModelSpec& model, const SystemSpec& system,
                        const ParallelismPlan& plan, double tokens);

/// Throws ValidationError if `plan` does not fit `system` (device count,
/// missing network for multi-device plans) or cannot shard `model`.
void check_plan_fits(const ModelSpec& model, const SystemSpec& system,
                     const ParallelismPlan& plan);

/// Largest batch whose per-device weights and KV cache fit in
/// (1 - reserve) x capacity. Returns 0 when the weights alone do not fit.
std::int64_t max_batch_for(double capacity, double weight_bytes_per_device,
                           double kv_bytes_per_sequence_per_device, double reserve_fraction);

/// KV is sized for input_len + output_len tokens on the serving tier.
std::int64_t max_batch(const ModelSpec& model, const SystemSpec& system,
                       const ParallelismPlan& plan, const WorkloadShape& shape,
                       double reserve_fraction = 0.0);

/// One forward traversal (all stages) of a prefill pass or a single decode
/// step, per device, with TP/PP communication.
TimingBreakdown forward_step_time(const ModelSpec& model, const SystemSpec& system,
                                  const ParallelismPlan& plan, Phase phase,
                                  const WorkloadShape& shape, const CostOptions& options = {});

/// Static-batch prefill followed by output_len decode steps; decode step k
/// (1-based) attends over input_len + k tokens.
InferenceResult run_inference(const ModelSpec& model, const SystemSpec& system,
                              const ParallelismPlan& plan, const WorkloadShape& shape,
                              const InferenceOptions& options = {});

struct SystemUnderTest {
  std::string name;
  SystemSpec system;
  ParallelismPlan plan;
};

/// Copy of `system` with every matrix and vector peak multiplied by `scale`.
SystemSpec scale_compute(const SystemSpec& system, double scale);

struct SpeedupRow {
  std::string model;
  std::int64_t input_len = 0;
  std::int64_t output_len = 0;
  double compute_scale = 1;
  std::int64_t baseline_batch = 0;
  std::int64_t candidate_batch = 0;
  double baseline_throughput = 0;
  double candidate_throughput = 0;
  double throughput_speedup = 0;  // candidate / baseline
  double baseline_latency = 0;    // batch 1
  double candidate_latency = 0;
  double latency_speedup = 0;  // baseline / candidate
  double baseline_mfu = 0;
  double candidate_mfu = 0;
};

struct LengthPair {
  std::int64_t input_len = 0;
  std::int64_t output_len = 0;
};

/// Throughput is compared with each system at its own maximum batch (capped
/// by `batch_cap` when set); latency is compared at batch 1. The candidate's
/// compute peaks are scaled by each entry of `compute_scales`.
std::vector<SpeedupRow> speedup_matrix(std::span<const ModelSpec> models,
                                       const SystemUnderTest& baseline,
                                       const SystemUnderTest& candidate,
                                       std::span<const LengthPair> lengths,
                                       std::span<const double> compute_scales,
                                       const InferenceOptions& options = {},
                                       std::optional<std::int64_t> batch_cap = std::nullopt);

struct TpOverheadRow {
  std::int64_t tp = 1;
  double time = 0;        // decode time at this tp
  double ideal_time = 0;  // single-device decode time / tp
  double overhead = 0;    // (time - ideal) / ideal
  double allreduce_time = 0;
  double allreduce_share = 0;  // allreduce_time / (time - ideal)
};

/// Decode-phase overhead of tensor parallelism against the ideal 1/tp
/// scaling of the single-device run. `tp_values` must contain 1.
std::vector<TpOverheadRow> tp_overhead_curve(const ModelSpec& model, const SystemSpec& system,
                                             const WorkloadShape& shape,
                                             std::span<const std::int64_t> tp_values,
                                             const InferenceOptions& options = {});

}  // namespace pfsim
