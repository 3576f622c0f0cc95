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

#include "pfsim/system.h"
#include "pfsim/workload.h"

namespace pfsim::testing {

// h=4, L=2, one head of width 4, two-matrix FFN of width 8, V=10.
inline ModelSpec tiny_model() {
  ModelSpec m;
  m.name = "tiny";
  m.hidden_size = 4;
  m.num_layers = 2;
  m.num_heads = 1;
  m.num_kv_heads = 1;
  m.head_dim = 4;
  m.ffn_size = 8;
  m.ffn_mat_count = 2;
  m.vocab_size = 10;
  return m;
}

// 405B-scale model served in fp8.
inline ModelSpec llama405b_fp8() {
  ModelSpec m = model_preset("llama-3.1-405b");
  m.weight_dtype_bytes = 1;
  m.activation_dtype_bytes = 1;
  m.kv_dtype_bytes = 1;
  return m;
}

// One processor with a flat 1e12 FLOP/s peak and 1e12 B/s memory, no
// latencies, identity curves.
inline SystemSpec unit_system(std::int64_t count = 1) {
  SystemSpec s;
  s.name = "unit";
  s.processor.peak_matrix_flops = {{Dtype::fp16, 1e12}, {Dtype::bf16, 1e12}, {Dtype::fp8, 2e12}};
  s.processor.peak_vector_flops = 1e12;
  s.processor.count = count;
  MemoryTier hbm;
  hbm.role = MemoryRole::local_hbm;
  hbm.capacity = 1e12;
  hbm.bandwidth = 1e12;
  s.memory_tiers = {hbm};
  if (count > 1) {
    NetworkSpec n;
    n.link_bandwidth = 1e11;
    n.per_message_latency = 0;
    n.gpus_per_tray = std::min<std::int64_t>(count, 8);
    n.trays_per_rack = (count + 7) / 8;
    s.network = n;
  }
  return s;
}

// H100 box scaled out to `count` GPUs, eight per tray.
inline SystemSpec h100_cluster(std::int64_t count) {
  SystemSpec s = system_preset("h100-dgx");
  s.processor.count = count;
  s.network->trays_per_rack = (count + 7) / 8;
  return s;
}

}  // namespace pfsim::testing
