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

#include "pfsim/types.h"

namespace pfsim {

/// Decoder-only transformer architecture. Attention uses grouped-query
/// attention when `num_kv_heads < num_heads`; the FFN is gated when
/// `ffn_mat_count == 3`.
struct ModelSpec {
  std::string name;
  std::int64_t hidden_size = 0;
  std::int64_t num_layers = 0;
  std::int64_t num_heads = 0;
  std::int64_t num_kv_heads = 0;
  std::int64_t head_dim = 0;
  std::int64_t ffn_size = 0;
  std::int64_t ffn_mat_count = 3;
  std::int64_t vocab_size = 0;
  int weight_dtype_bytes = 2;
  int activation_dtype_bytes = 2;
  int kv_dtype_bytes = 2;
  bool norm_has_bias = false;
  bool tied_embeddings = false;

  /// Throws ValidationError naming the first violated field.
  void validate() const;

  /// Width of the fused K and V projections combined.
  std::int64_t kv_width() const { return 2 * num_kv_heads * head_dim; }
};

/// Published architectures usable by name from config files:
/// llama-3.1-8b, llama-3.1-70b, llama-3.1-405b, and a 1T-class projection.
ModelSpec model_preset(std::string_view name);
std::vector<std::string> model_preset_names();

struct WorkloadShape {
  std::int64_t batch = 1;
  std::int64_t input_len = 1;
  std::int64_t output_len = 0;
  // Context visible to the decode step, including the token being generated.
  std::int64_t kv_len = 0;

  void validate(Phase phase) const;
};

struct FlopBreakdown {
  double qkv_proj = 0;
  double attention = 0;
  double out_proj = 0;
  double ffn = 0;
  double logits = 0;
  double norm_residual = 0;

  double matmul() const { return qkv_proj + attention + out_proj + ffn + logits; }
  double total() const { return matmul() + norm_residual; }

  FlopBreakdown& operator+=(const FlopBreakdown& other);
  FlopBreakdown scaled(double factor) const;
};

struct ByteBreakdown {
  double weights = 0;
  double activations = 0;
  double kv_cache = 0;
  double attention_scratch = 0;

  double total() const { return weights + activations + kv_cache + attention_scratch; }

  ByteBreakdown& operator+=(const ByteBreakdown& other);
  ByteBreakdown scaled(double factor) const;
};

struct CostBreakdown {
  FlopBreakdown flops;
  ByteBreakdown bytes;

  CostBreakdown& operator+=(const CostBreakdown& other);
  CostBreakdown scaled(double factor) const;
};

/// Accounting knobs. Defaults follow Megatron-style conventions: no causal
/// discount, unfused attention (score matrix written once and read once),
/// two norms plus two residual adds per layer.
struct CostOptions {
  std::int64_t attention_scratch_passes = 2;
  // FLOPs per token per hidden element per layer for norms + residual adds.
  double norm_residual_flops_per_element = 8;
  // Logits over every position during inference. Training always uses all.
  bool logits_all_positions = false;
  // Charge the embedding-table gather to the head's byte count.
  bool include_embedding_reads = false;
};

/// Per-layer weight element counts, by projection.
struct LayerWeights {
  std::int64_t qkv = 0;
  std::int64_t out = 0;
  std::int64_t ffn = 0;
  std::int64_t norms = 0;

  std::int64_t total() const { return qkv + out + ffn + norms; }
};

LayerWeights layer_weight_elements(const ModelSpec& model);

/// Total parameter count from tensor shapes: embeddings, per-layer
/// projections and norms, final norm, and (unless tied) the output head.
std::int64_t param_count(const ModelSpec& model);

enum class KernelKind { qkv_proj, attention, out_proj, ffn, norm_residual, logits };

std::string_view to_string(KernelKind kind);

/// One kernel invocation in the layer-factored cost model. Byte components
/// are kept separate so the parallel module can apply per-component sharding
/// (weights split by TP, KV split by KV heads, layer activations replicated).
struct Kernel {
  KernelKind kind;
  ComputeUnit unit;
  double flops = 0;
  double weight_bytes = 0;
  double activation_bytes = 0;
  double kv_bytes = 0;
  double scratch_bytes = 0;

  double bytes() const { return weight_bytes + activation_bytes + kv_bytes + scratch_bytes; }
};

/// Kernels of one transformer layer. Prefill and train use s = ctx =
/// input_len; decode uses s = 1 and ctx = kv_len.
std::vector<Kernel> layer_kernels(const ModelSpec& model, Phase phase,
                                  const WorkloadShape& shape,
                                  const CostOptions& options = {});

/// Output-head kernel (final norm is folded into the layer norms). Decode and
/// prefill evaluate logits for the last position only unless configured.
Kernel head_kernel(const ModelSpec& model, Phase phase, const WorkloadShape& shape,
                   const CostOptions& options = {});

/// Forward FLOPs of one layer. Multiply-add counts as 2 FLOPs. Throws
/// SimulationError if an exact count does not fit the 128-bit counter.
FlopBreakdown layer_flops(const ModelSpec& model, Phase phase, const WorkloadShape& shape,
                          const CostOptions& options = {});

ByteBreakdown layer_bytes(const ModelSpec& model, Phase phase, const WorkloadShape& shape,
                          const CostOptions& options = {});

CostBreakdown layer_cost(const ModelSpec& model, Phase phase, const WorkloadShape& shape,
                         const CostOptions& options = {});

/// All layers plus the output head.
CostBreakdown forward_cost(const ModelSpec& model, Phase phase, const WorkloadShape& shape,
                           const CostOptions& options = {});

/// KV-cache bytes for one sequence of `tokens` tokens across all layers.
double kv_bytes_per_sequence(const ModelSpec& model, std::int64_t tokens);

struct IntensityPoint {
  std::int64_t batch = 0;
  std::int64_t length = 0;
  double flops = 0;
  double bytes = 0;
  double intensity = 0;
};

/// FLOPs per byte across all L layers on a batch x length grid. `length` is
/// the input length for prefill and the KV length for decode.
std::vector<IntensityPoint> arithmetic_intensity_curve(const ModelSpec& model, Phase phase,
                                                       std::span<const std::int64_t> batch_grid,
                                                       std::span<const std::int64_t> length_grid,
                                                       const CostOptions& options = {});

struct DlrmSpec {
  std::int64_t num_tables = 1;
  std::int64_t rows_per_table = 1;
  std::int64_t embed_dim = 1;
  std::int64_t pooling_factor = 1;
  int dtype_bytes = 2;
  std::int64_t batch = 1;

  void validate() const;
  double table_bytes() const;
  double total_table_bytes() const;
};

/// Bytes gathered by one pooled lookup pass over every table.
double dlrm_pooling_bytes(const DlrmSpec& spec);

}  // namespace pfsim
