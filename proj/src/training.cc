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

#include "pfsim/training.h"

#include <algorithm>
#include <tuple>

#include "pfsim/errors.h"

namespace pfsim {

double activation_bytes_per_layer(const ModelSpec& model, std::int64_t microbatch,
                                  std::int64_t seq_len, std::int64_t tp, bool recompute) {
  const double s = static_cast<double>(seq_len);
  const double b = static_cast<double>(microbatch);
  const double h = static_cast<double>(model.hidden_size);
  const double a = static_cast<double>(model.num_heads);
  const double ab = model.activation_dtype_bytes;
  const double t = static_cast<double>(tp);
  if (recompute) return s * b * h * ab / t;
  // Megatron estimate for 16-bit activations, rescaled to the configured width.
  return s * b * h * (34.0 + 5.0 * a * s / h) * (ab / 2.0) / t;
}

TrainMemoryBreakdown train_memory(const ModelSpec& model, const ParallelismPlan& plan,
                                  const TrainOptions& options) {
  model.validate();
  check_shardable(model, plan);
  if (options.seq_len < 1) throw ValidationError("train: seq_len must be >= 1");
  const double shards = static_cast<double>(plan.tp * plan.pp);
  const double params = static_cast<double>(param_count(model));

  TrainMemoryBreakdown m;
  m.params = params * model.weight_dtype_bytes / shards;
  m.gradients = m.params;
  const double opt_bytes =
      options.mixed_precision ? options.optimizer_bytes_mixed : options.optimizer_bytes_full;
  m.optimizer_states = params * opt_bytes / shards;
  // 1F1B keeps at most pp microbatches in flight on the first stage.
  const double in_flight = static_cast<double>(std::min(plan.pp, plan.num_microbatches));
  const double layers_per_stage = static_cast<double>(model.num_layers / plan.pp);
  m.activations = activation_bytes_per_layer(model, plan.microbatch, options.seq_len, plan.tp,
                                             options.recompute_activations) *
                  layers_per_stage * in_flight;
  return m;
}

OffloadPlan offload_volume(const ModelSpec& model, const ParallelismPlan& plan,
                           const SystemSpec& system, const TrainOptions& options) {
  system.validate();
  const MemoryTier& local = system.local_tier();
  OffloadPlan out;
  out.excess_bytes = std::max(0.0, train_memory(model, plan, options).total() - local.capacity);
  if (out.excess_bytes == 0) return out;
  out.bytes_per_step = 2.0 * out.excess_bytes;

  struct Candidate {
    MemoryRole role;
    TrafficClass cls;
  };
  constexpr Candidate kOrder[] = {
      {MemoryRole::fabric_shared, TrafficClass::offload_tray},
      {MemoryRole::host_ddr, TrafficClass::offload_tray},
      {MemoryRole::external_store, TrafficClass::offload_external},
  };
  for (const Candidate& c : kOrder) {
    if (c.role == local.role) continue;
    if (system.find_tier(c.role)) {
      out.destination = c.role;
      out.traffic_class = c.cls;
      return out;
    }
  }
  throw SimulationError("training state needs " + std::to_string(out.excess_bytes) +
                        " bytes beyond the local tier of system '" + system.name +
                        "' and no offload tier is configured");
}

TrainStepResult train_step_time(const ModelSpec& model, const SystemSpec& system,
                                const ParallelismPlan& plan, const TrainOptions& options) {
  check_plan_fits(model, system, plan);
  TrainStepResult r;
  r.plan = plan;
  r.memory = train_memory(model, plan, options);
  r.offload = offload_volume(model, plan, system, options);

  const MemoryTier& tier = system.local_tier();
  const WorkloadShape micro{plan.microbatch, options.seq_len, 0, 0};
  // Forward once, backward at twice the forward work, plus a second forward
  // when activations are recomputed.
  const double multiplier = options.recompute_activations ? 4.0 : 3.0;

  TimingBreakdown layer;
  double layer_matmul = 0;
  for (const Kernel& k : layer_kernels(model, Phase::train, micro, options.cost)) {
    const double fwd = sharded_kernel_time(k, model, system, tier, plan.tp);
    const double bwd = sharded_kernel_time(k, model, system, tier, plan.tp, 2.0);
    charge(layer, k.kind, fwd * (multiplier - 2.0) + bwd);
    if (k.unit == ComputeUnit::matrix) layer_matmul += k.flops;
  }
  const double tokens = static_cast<double>(plan.microbatch * options.seq_len);
  layer.tp_comm = options.tp_training_passes * tp_layer_comm_time(model, system, plan.tp, tokens);

  TimingBreakdown stage = layer.scaled(static_cast<double>(model.num_layers / plan.pp));
  const Kernel head = head_kernel(model, Phase::train, micro, options.cost);
  charge(stage, head.kind,
         sharded_kernel_time(head, model, system, tier, plan.tp) +
             sharded_kernel_time(head, model, system, tier, plan.tp, 2.0));
  stage.pp_comm = plan.pp > 1 ? 2.0 * pp_boundary_time(model, system, plan, tokens) : 0.0;

  r.stage_time = stage.total();
  const PipelineTiming pipe = pipeline_time(r.stage_time, plan.pp, plan.num_microbatches);
  r.pipeline_time = pipe.total;
  r.bubble_fraction = pipe.bubble_fraction;
  r.breakdown = stage.scaled(static_cast<double>(plan.num_microbatches + plan.pp - 1));

  if (plan.dp > 1 && !plan.dp_overlap) {
    const double grad_bytes = r.memory.gradients;
    r.dp_comm_time = allreduce_time(grad_bytes, plan.dp,
                                    system.network->link_for_extent(plan.devices()));
  }

  if (r.offload.destination) {
    const MemoryTier& dest = *system.find_tier(*r.offload.destination);
    r.offload_time = r.offload.bytes_per_step /
                         effective_bandwidth(dest, r.offload.bytes_per_step, system.bandwidth_curve) +
                     dest.fixed_latency;
    r.breakdown.memory_offload = r.offload_time;
  }
  r.step_time = r.pipeline_time + r.dp_comm_time + r.offload_time;

  const double sequences_per_replica = static_cast<double>(plan.num_microbatches);
  const double forward_matmul = (layer_matmul * static_cast<double>(model.num_layers) + head.flops) *
                                sequences_per_replica * static_cast<double>(plan.dp);
  r.model_flops = 3.0 * forward_matmul;
  const double peak = system.processor.peak_for(compute_dtype(model, system.processor)) *
                      static_cast<double>(plan.devices());
  r.mfu = r.model_flops / (r.step_time * peak);

  TrafficRequest req;
  req.phase = Phase::train;
  req.tokens_processed = static_cast<double>(plan.global_batch() * options.seq_len);
  req.seq_len = options.seq_len;
  req.offload_bytes = r.offload.bytes_per_step * static_cast<double>(plan.devices());
  req.offload_class = r.offload.traffic_class;
  req.tp_training_passes = options.tp_training_passes;
  r.ledger = traffic_ledger(model, plan, req);
  return r;
}

bool plan_better(const TrainStepResult& a, const TrainStepResult& b) {
  return std::make_tuple(-a.mfu, a.plan.tp, a.plan.pp, a.plan.microbatch) <
         std::make_tuple(-b.mfu, b.plan.tp, b.plan.pp, b.plan.microbatch);
}

TrainStepResult search_plan(const ModelSpec& model, const SystemSpec& system,
                            std::int64_t budget, const SearchConstraints& c) {
  model.validate();
  system.validate();
  if (budget < 1) throw ValidationError("search: device_budget must be >= 1");
  if (budget > system.processor.count) {
    throw ValidationError("search: device_budget exceeds processor.count of system '" +
                          system.name + "'");
  }
  if (c.global_batch < 1) throw ValidationError("search: global_batch must be >= 1");
  if (c.max_microbatch < 1) throw ValidationError("search: max_microbatch must be >= 1");

  const std::int64_t tp_cap = system.network ? system.network->gpus_per_tray : 1;
  std::optional<TrainStepResult> best;
  std::string binding = "no (tp, pp, dp) factorization of the device budget";

  for (std::int64_t tp = 1; tp <= budget; ++tp) {
    if (budget % tp != 0) continue;
    if (tp > tp_cap) {
      binding = "tp <= gpus_per_tray (" + std::to_string(tp_cap) + ")";
      continue;
    }
    for (std::int64_t pp = 1; pp <= budget / tp; ++pp) {
      if ((budget / tp) % pp != 0) continue;
      const std::int64_t dp = budget / tp / pp;
      ParallelismPlan plan{tp, pp, dp, 1, 1, c.sequence_parallel, c.dp_overlap};
      try {
        check_shardable(model, plan);
      } catch (const ValidationError& e) {
        binding = e.what();
        continue;
      }
      if (c.global_batch % dp != 0) {
        binding = "global_batch divisible by dp";
        continue;
      }
      const std::int64_t per_replica = c.global_batch / dp;
      for (std::int64_t mb = 1; mb <= std::min(per_replica, c.max_microbatch); ++mb) {
        if (per_replica % mb != 0) continue;
        plan.microbatch = mb;
        plan.num_microbatches = per_replica / mb;
        try {
          TrainStepResult r = train_step_time(model, system, plan, c.options);
          if (!best || plan_better(r, *best)) best = std::move(r);
        } catch (const SimulationError& e) {
          binding = e.what();
        }
      }
    }
  }
  if (!best) throw SimulationError("no feasible training plan: " + binding);
  return *best;
}

}  // namespace pfsim
