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

#include "pfsim/parallel.h"

#include <algorithm>

#include "pfsim/errors.h"

namespace pfsim {

void ParallelismPlan::validate() const {
  auto need = [](bool ok, const char* field) {
    if (!ok) throw ValidationError(std::string("parallelism plan: ") + field + " must be >= 1");
  };
  need(tp >= 1, "tp");
  need(pp >= 1, "pp");
  need(dp >= 1, "dp");
  need(microbatch >= 1, "microbatch");
  need(num_microbatches >= 1, "num_microbatches");
}

void check_shardable(const ModelSpec& model, const ParallelismPlan& plan) {
  plan.validate();
  if (model.num_layers % plan.pp != 0) {
    throw ValidationError("num_layers (" + std::to_string(model.num_layers) +
                          ") is not divisible by pp (" + std::to_string(plan.pp) + ")");
  }
  if (model.num_heads % plan.tp != 0) {
    throw ValidationError("num_heads (" + std::to_string(model.num_heads) +
                          ") is not divisible by tp (" + std::to_string(plan.tp) + ")");
  }
  if (model.ffn_size % plan.tp != 0) {
    throw ValidationError("ffn_size (" + std::to_string(model.ffn_size) +
                          ") is not divisible by tp (" + std::to_string(plan.tp) + ")");
  }
  if (model.num_kv_heads % plan.tp != 0 && plan.tp % model.num_kv_heads != 0) {
    throw ValidationError("num_kv_heads (" + std::to_string(model.num_kv_heads) +
                          ") and tp (" + std::to_string(plan.tp) +
                          ") must divide one another");
  }
}

std::int64_t kv_shard_factor(const ModelSpec& model, std::int64_t tp) {
  return std::min(tp, model.num_kv_heads);
}

ShardSizes shard_sizes(const ModelSpec& model, const ParallelismPlan& plan,
                       const WorkloadShape& shape) {
  model.validate();
  check_shardable(model, plan);
  const double tp = static_cast<double>(plan.tp);
  const double pp = static_cast<double>(plan.pp);
  const double layers_per_stage = static_cast<double>(model.num_layers) / pp;

  ShardSizes out;
  out.weight_bytes = static_cast<double>(param_count(model)) * model.weight_dtype_bytes / (tp * pp);
  out.kv_bytes = static_cast<double>(shape.batch) *
                 kv_bytes_per_sequence(model, shape.input_len + shape.output_len) /
                 (static_cast<double>(kv_shard_factor(model, plan.tp)) * pp);
  out.replicated_activation_bytes = layers_per_stage * 2.0 * static_cast<double>(shape.batch) *
                                    static_cast<double>(shape.input_len) *
                                    static_cast<double>(model.hidden_size) *
                                    model.activation_dtype_bytes;
  out.tp_group_activation_bytes = tp * out.replicated_activation_bytes;
  return out;
}

double allreduce_time(double bytes, std::int64_t n, const LinkSpec& link) {
  if (n < 1) throw ValidationError("allreduce: group size must be >= 1");
  if (bytes < 0) throw ValidationError("allreduce: bytes must be >= 0");
  if (n == 1) return 0.0;
  const double steps = 2.0 * static_cast<double>(n - 1);
  const double chunk = bytes / static_cast<double>(n);
  return steps * (chunk / link.bandwidth) + steps * link.latency;
}

double allreduce_time(double bytes, std::int64_t n, const NetworkSpec& net) {
  return allreduce_time(bytes, n, net.intra_tray_link());
}

double p2p_time(double bytes, const LinkSpec& link) {
  if (bytes < 0) throw ValidationError("p2p: bytes must be >= 0");
  return bytes / link.bandwidth + link.latency;
}

double p2p_time(double bytes, const NetworkSpec& net) { return p2p_time(bytes, net.intra_tray_link()); }

PipelineTiming pipeline_time(double stage_time, std::int64_t p, std::int64_t m) {
  if (p < 1 || m < 1) throw ValidationError("pipeline: p and m must be >= 1");
  if (stage_time < 0) throw ValidationError("pipeline: stage time must be >= 0");
  return {static_cast<double>(m + p - 1) * stage_time,
          static_cast<double>(p - 1) / static_cast<double>(m)};
}

std::string_view to_string(TrafficClass cls) {
  switch (cls) {
    case TrafficClass::tp_comm: return "tp_comm";
    case TrafficClass::pp_comm: return "pp_comm";
    case TrafficClass::dp_comm: return "dp_comm";
    case TrafficClass::offload_tray: return "offload_tray";
    case TrafficClass::offload_external: return "offload_external";
  }
  return "unknown";
}

TrafficClass parse_traffic_class(std::string_view text) {
  for (TrafficClass cls : kTrafficClasses) {
    if (to_string(cls) == text) return cls;
  }
  throw ValidationError("unknown traffic class '" + std::string(text) + "'");
}

double& TrafficLedger::operator[](TrafficClass cls) {
  switch (cls) {
    case TrafficClass::tp_comm: return tp_comm;
    case TrafficClass::pp_comm: return pp_comm;
    case TrafficClass::dp_comm: return dp_comm;
    case TrafficClass::offload_tray: return offload_tray;
    case TrafficClass::offload_external: return offload_external;
  }
  return tp_comm;
}

double TrafficLedger::operator[](TrafficClass cls) const {
  return const_cast<TrafficLedger&>(*this)[cls];
}

TrafficLedger& TrafficLedger::operator+=(const TrafficLedger& o) {
  for (TrafficClass cls : kTrafficClasses) (*this)[cls] += o[cls];
  return *this;
}

TrafficLedger TrafficLedger::scaled(double factor) const {
  TrafficLedger out = *this;
  for (TrafficClass cls : kTrafficClasses) out[cls] *= factor;
  return out;
}

TrafficLedger traffic_ledger(const ModelSpec& model, const ParallelismPlan& plan,
                             const TrafficRequest& req) {
  model.validate();
  plan.validate();
  if (req.tokens_processed < 0) throw ValidationError("traffic ledger: tokens must be >= 0");
  if (req.offload_bytes < 0) throw ValidationError("traffic ledger: offload bytes must be >= 0");

  constexpr double kBitsPerByte = 8.0;
  const bool training = req.phase == Phase::train;
  const double token_bytes =
      static_cast<double>(model.hidden_size) * model.activation_dtype_bytes;
  const double layers = static_cast<double>(model.num_layers);

  TrafficLedger ledger;
  if (plan.tp > 1) {
    const double passes = training ? req.tp_training_passes : 1.0;
    ledger.tp_comm = kBitsPerByte * req.tokens_processed * token_bytes * 2.0 * layers * passes;
  }
  if (plan.pp > 1) {
    const double directions = training ? 2.0 : 1.0;
    ledger.pp_comm = kBitsPerByte * req.tokens_processed * token_bytes *
                     static_cast<double>(plan.pp - 1) * directions;
  }
  if (training && plan.dp > 1) {
    if (req.seq_len < 1) throw ValidationError("traffic ledger: seq_len must be >= 1");
    const double steps = req.tokens_processed /
                         (static_cast<double>(plan.global_batch()) * static_cast<double>(req.seq_len));
    const double gradient_bytes =
        static_cast<double>(param_count(model)) * model.weight_dtype_bytes;
    ledger.dp_comm = kBitsPerByte * steps * static_cast<double>(plan.dp) * gradient_bytes;
  }
  ledger[req.offload_class] += kBitsPerByte * req.offload_bytes;
  return ledger;
}

}  // namespace pfsim
