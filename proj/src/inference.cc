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

#include "pfsim/inference.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pfsim/errors.h"

namespace pfsim {

TimingBreakdown& TimingBreakdown::operator+=(const TimingBreakdown& o) {
  gemm += o.gemm;
  attention += o.attention;
  norm_residual_other += o.norm_residual_other;
  tp_comm += o.tp_comm;
  pp_comm += o.pp_comm;
  memory_offload += o.memory_offload;
  return *this;
}

TimingBreakdown TimingBreakdown::scaled(double f) const {
  return {gemm * f, attention * f, norm_residual_other * f, tp_comm * f, pp_comm * f,
          memory_offload * f};
}

Dtype compute_dtype(const ModelSpec& model, const ProcessorSpec& processor) {
  if (model.weight_dtype_bytes == 2) {
    if (processor.peak_matrix_flops.count(Dtype::bf16)) return Dtype::bf16;
    return Dtype::fp16;
  }
  return dtype_for_bytes(model.weight_dtype_bytes);
}

double sharded_kernel_time(const Kernel& k, const ModelSpec& model, const SystemSpec& system,
                           const MemoryTier& tier, std::int64_t tp, double work_multiplier) {
  const double t = static_cast<double>(tp);
  double flops = k.flops;
  double bytes = k.activation_bytes;
  if (k.unit == ComputeUnit::matrix) {
    flops /= t;
    bytes += k.weight_bytes / t + k.scratch_bytes / t +
             k.kv_bytes / static_cast<double>(kv_shard_factor(model, tp));
  } else {
    bytes += k.weight_bytes + k.scratch_bytes + k.kv_bytes;
  }
  return roofline_time(flops * work_multiplier, bytes * work_multiplier,
                       compute_dtype(model, system.processor), system, tier, k.unit);
}

void charge(TimingBreakdown& timing, KernelKind kind, double seconds) {
  switch (kind) {
    case KernelKind::qkv_proj:
    case KernelKind::out_proj:
    case KernelKind::ffn:
    case KernelKind::logits: timing.gemm += seconds; break;
    case KernelKind::attention: timing.attention += seconds; break;
    case KernelKind::norm_residual: timing.norm_residual_other += seconds; break;
  }
}

namespace {

const NetworkSpec& require_network(const SystemSpec& system) {
  if (!system.network) {
    throw ValidationError("system '" + system.name +
                          "': a network section is required for multi-device plans");
  }
  return *system.network;
}

double activation_bytes(const ModelSpec& model, double tokens) {
  return tokens * static_cast<double>(model.hidden_size) * model.activation_dtype_bytes;
}

struct Traversal {
  TimingBreakdown timing;
  double matmul_flops = 0;  // unsharded, whole model
};

Traversal traverse(const ModelSpec& model, const SystemSpec& system, const ParallelismPlan& plan,
                   Phase phase, const WorkloadShape& shape, const CostOptions& options) {
  const MemoryTier& tier = system.serving_tier();
  const double layers = static_cast<double>(model.num_layers);
  Traversal out;

  TimingBreakdown layer;
  double layer_matmul = 0;
  for (const Kernel& k : layer_kernels(model, phase, shape, options)) {
    charge(layer, k.kind, sharded_kernel_time(k, model, system, tier, plan.tp));
    if (k.unit == ComputeUnit::matrix) layer_matmul += k.flops;
  }
  const double tokens =
      static_cast<double>(shape.batch) *
      static_cast<double>(phase == Phase::decode ? 1 : shape.input_len);
  layer.tp_comm = tp_layer_comm_time(model, system, plan.tp, tokens);
  out.timing = layer.scaled(layers);

  const Kernel head = head_kernel(model, phase, shape, options);
  charge(out.timing, head.kind, sharded_kernel_time(head, model, system, tier, plan.tp));
  out.timing.pp_comm = static_cast<double>(plan.pp - 1) * pp_boundary_time(model, system, plan, tokens);
  out.matmul_flops = layer_matmul * layers + head.flops;
  return out;
}

}  // namespace

double tp_layer_comm_time(const ModelSpec& model, const SystemSpec& system, std::int64_t tp,
                          double tokens) {
  if (tp == 1) return 0.0;
  const NetworkSpec& net = require_network(system);
  return 2.0 * allreduce_time(activation_bytes(model, tokens), tp, net.link_for_extent(tp));
}

double pp_boundary_time(const ModelSpec& model, const SystemSpec& system,
                        const ParallelismPlan& plan, double tokens) {
  if (plan.pp == 1) return 0.0;
  const NetworkSpec& net = require_network(system);
  return p2p_time(activation_bytes(model, tokens), net.link_for_extent(plan.tp * plan.pp));
}

void check_plan_fits(const ModelSpec& model, const SystemSpec& system,
                     const ParallelismPlan& plan) {
  model.validate();
  system.validate();
  check_shardable(model, plan);
  if (plan.devices() > system.processor.count) {
    throw ValidationError("plan needs tp*pp*dp = " + std::to_string(plan.devices()) +
                          " devices but system '" + system.name + "' has processor.count = " +
                          std::to_string(system.processor.count));
  }
  if (plan.devices() > 1) require_network(system);
}

std::int64_t max_batch_for(double capacity, double weights, double kv_per_seq, double reserve) {
  if (!(reserve >= 0 && reserve < 1)) {
    throw ValidationError("reserve_fraction must be in [0, 1)");
  }
  if (!(kv_per_seq > 0)) throw ValidationError("max batch: KV bytes per sequence must be > 0");
  const double usable = (1.0 - reserve) * capacity;
  if (weights > usable) return 0;
  const double b = std::floor((usable - weights) / kv_per_seq);
  constexpr double kCap = static_cast<double>(std::numeric_limits<std::int64_t>::max() / 2);
  return static_cast<std::int64_t>(std::min(b, kCap));
}

std::int64_t max_batch(const ModelSpec& model, const SystemSpec& system,
                       const ParallelismPlan& plan, const WorkloadShape& shape,
                       double reserve_fraction) {
  WorkloadShape one = shape;
  one.batch = 1;
  const ShardSizes shard = shard_sizes(model, plan, one);
  return max_batch_for(system.serving_tier().capacity, shard.weight_bytes, shard.kv_bytes,
                       reserve_fraction);
}

TimingBreakdown forward_step_time(const ModelSpec& model, const SystemSpec& system,
                                  const ParallelismPlan& plan, Phase phase,
                                  const WorkloadShape& shape, const CostOptions& options) {
  check_plan_fits(model, system, plan);
  return traverse(model, system, plan, phase, shape, options).timing;
}

InferenceResult run_inference(const ModelSpec& model, const SystemSpec& system,
                              const ParallelismPlan& plan, const WorkloadShape& shape,
                              const InferenceOptions& options) {
  check_plan_fits(model, system, plan);
  shape.validate(Phase::prefill);
  if (shape.output_len < 0) throw ValidationError("output_len must be >= 0");

  InferenceResult r;
  r.batch = shape.batch;
  r.max_batch = max_batch(model, system, plan, shape, options.reserve_fraction);
  if (options.enforce_memory && shape.batch > r.max_batch) {
    throw BatchOverflowError(shape.batch, r.max_batch);
  }

  const Traversal prefill = traverse(model, system, plan, Phase::prefill, shape, options.cost);
  r.prefill = prefill.timing;
  r.model_flops = prefill.matmul_flops;

  WorkloadShape step = shape;
  for (std::int64_t k = 1; k <= shape.output_len; ++k) {
    step.kv_len = shape.input_len + k;
    const Traversal t = traverse(model, system, plan, Phase::decode, step, options.cost);
    r.decode += t.timing;
    r.model_flops += t.matmul_flops;
  }

  r.prefill_time = r.prefill.total();
  r.decode_time = r.decode.total();
  r.breakdown = r.prefill;
  r.breakdown += r.decode;
  r.e2e_latency = r.prefill_time + r.decode_time;
  r.throughput = static_cast<double>(shape.batch * shape.output_len) / r.e2e_latency;
  const double peak = system.processor.peak_for(compute_dtype(model, system.processor)) *
                      static_cast<double>(plan.devices());
  r.mfu = r.model_flops / (r.e2e_latency * peak);
  return r;
}

SystemSpec scale_compute(const SystemSpec& system, double scale) {
  if (!(scale > 0)) throw ValidationError("compute scale must be > 0");
  SystemSpec out = system;
  for (auto& [dtype, peak] : out.processor.peak_matrix_flops) peak *= scale;
  out.processor.peak_vector_flops *= scale;
  return out;
}

namespace {

InferenceResult at_max_batch(const ModelSpec& model, const SystemUnderTest& sut,
                             const WorkloadShape& shape, const InferenceOptions& options,
                             std::optional<std::int64_t> cap) {
  std::int64_t b = max_batch(model, sut.system, sut.plan, shape, options.reserve_fraction);
  if (b < 1) {
    throw SimulationError("model '" + model.name + "' does not fit on system '" + sut.name + "'");
  }
  if (cap) b = std::min(b, *cap);
  WorkloadShape s = shape;
  s.batch = b;
  return run_inference(model, sut.system, sut.plan, s, options);
}

}  // namespace

std::vector<SpeedupRow> speedup_matrix(std::span<const ModelSpec> models,
                                       const SystemUnderTest& baseline,
                                       const SystemUnderTest& candidate,
                                       std::span<const LengthPair> lengths,
                                       std::span<const double> compute_scales,
                                       const InferenceOptions& options,
                                       std::optional<std::int64_t> batch_cap) {
  if (batch_cap && *batch_cap < 1) throw ValidationError("speedup: batch_cap must be >= 1");
  std::vector<SpeedupRow> rows;
  for (const ModelSpec& model : models) {
    for (const LengthPair& len : lengths) {
      WorkloadShape shape{1, len.input_len, len.output_len, 0};
      const InferenceResult base_tp = at_max_batch(model, baseline, shape, options, batch_cap);
      const InferenceResult base_lat =
          run_inference(model, baseline.system, baseline.plan, shape, options);
      for (double scale : compute_scales) {
        SystemUnderTest scaled = candidate;
        scaled.system = scale_compute(candidate.system, scale);
        const InferenceResult cand_tp = at_max_batch(model, scaled, shape, options, batch_cap);
        const InferenceResult cand_lat =
            run_inference(model, scaled.system, scaled.plan, shape, options);

        SpeedupRow row;
        row.model = model.name;
        row.input_len = len.input_len;
        row.output_len = len.output_len;
        row.compute_scale = scale;
        row.baseline_batch = base_tp.batch;
        row.candidate_batch = cand_tp.batch;
        row.baseline_throughput = base_tp.throughput;
        row.candidate_throughput = cand_tp.throughput;
        row.throughput_speedup = cand_tp.throughput / base_tp.throughput;
        row.baseline_latency = base_lat.e2e_latency;
        row.candidate_latency = cand_lat.e2e_latency;
        row.latency_speedup = base_lat.e2e_latency / cand_lat.e2e_latency;
        row.baseline_mfu = base_tp.mfu;
        row.candidate_mfu = cand_tp.mfu;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::vector<TpOverheadRow> tp_overhead_curve(const ModelSpec& model, const SystemSpec& system,
                                             const WorkloadShape& shape,
                                             std::span<const std::int64_t> tp_values,
                                             const InferenceOptions& options) {
  if (std::find(tp_values.begin(), tp_values.end(), 1) == tp_values.end()) {
    throw ValidationError("tp overhead: tp list must include 1 as the baseline");
  }
  ParallelismPlan single;
  const double t1 = run_inference(model, system, single, shape, options).decode_time;

  std::vector<TpOverheadRow> rows;
  for (std::int64_t tp : tp_values) {
    ParallelismPlan plan;
    plan.tp = tp;
    const InferenceResult r = run_inference(model, system, plan, shape, options);
    TpOverheadRow row;
    row.tp = tp;
    row.time = r.decode_time;
    row.ideal_time = t1 / static_cast<double>(tp);
    row.overhead = (row.time - row.ideal_time) / row.ideal_time;
    row.allreduce_time = r.decode.tp_comm;
    const double added = row.time - row.ideal_time;
    row.allreduce_share = tp == 1 || added <= 0 ? 0.0 : row.allreduce_time / added;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace pfsim
