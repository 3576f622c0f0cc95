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

#include "pfsim/workload.h"

#include <initializer_list>
#include <limits>

#include "pfsim/errors.h"

namespace pfsim {

namespace {

using Wide = __int128;

// Exact product of non-negative integer factors. FLOP and byte counts can
// exceed 2^63 at large batch x context, so products are carried in 128 bits
// and only rounded to double once.
double exact_product(std::initializer_list<std::int64_t> factors) {
  Wide acc = 1;
  for (std::int64_t f : factors) {
    if (__builtin_mul_overflow(acc, static_cast<Wide>(f), &acc)) {
      throw SimulationError("FLOP/byte counter overflow (exceeds 128-bit range)");
    }
  }
  return static_cast<double>(acc);
}

void require(bool ok, const char* field, const char* expectation) {
  if (!ok) {
    throw ValidationError(std::string("model spec: ") + field + " " + expectation);
  }
}

bool valid_dtype_bytes(int bytes) { return bytes == 1 || bytes == 2 || bytes == 4; }

}  // namespace

void ModelSpec::validate() const {
  require(hidden_size >= 1, "hidden_size", "must be >= 1");
  require(num_layers >= 1, "num_layers", "must be >= 1");
  require(num_heads >= 1, "num_heads", "must be >= 1");
  require(num_kv_heads >= 1, "num_kv_heads", "must be >= 1");
  require(head_dim >= 1, "head_dim", "must be >= 1");
  require(ffn_size >= 1, "ffn_size", "must be >= 1");
  require(vocab_size >= 1, "vocab_size", "must be >= 1");
  require(ffn_mat_count == 2 || ffn_mat_count == 3, "ffn_mat_count", "must be 2 or 3");
  require(hidden_size == num_heads * head_dim, "hidden_size",
          "must equal num_heads * head_dim");
  require(num_heads % num_kv_heads == 0, "num_kv_heads", "must divide num_heads");
  require(valid_dtype_bytes(weight_dtype_bytes), "weight_dtype_bytes", "must be 1, 2 or 4");
  require(valid_dtype_bytes(activation_dtype_bytes), "activation_dtype_bytes",
          "must be 1, 2 or 4");
  require(valid_dtype_bytes(kv_dtype_bytes), "kv_dtype_bytes", "must be 1, 2 or 4");
}

ModelSpec model_preset(std::string_view name) {
  ModelSpec m;
  m.name = std::string(name);
  m.ffn_mat_count = 3;
  m.vocab_size = 128256;
  m.head_dim = 128;
  if (name == "llama-3.1-8b") {
    m.hidden_size = 4096;
    m.num_layers = 32;
    m.num_heads = 32;
    m.num_kv_heads = 8;
    m.ffn_size = 14336;
  } else if (name == "llama-3.1-70b") {
    m.hidden_size = 8192;
    m.num_layers = 80;
    m.num_heads = 64;
    m.num_kv_heads = 8;
    m.ffn_size = 28672;
  } else if (name == "llama-3.1-405b") {
    m.hidden_size = 16384;
    m.num_layers = 126;
    m.num_heads = 128;
    m.num_kv_heads = 8;
    m.ffn_size = 53248;
  } else if (name == "dense-1t") {
    // Projected 1T-class dense model: LLaMA-style block scaled in width/depth.
    m.hidden_size = 24576;
    m.num_layers = 128;
    m.num_heads = 192;
    m.num_kv_heads = 16;
    m.ffn_size = 86016;
  } else {
    throw ValidationError("unknown model preset '" + std::string(name) + "'");
  }
  return m;
}

std::vector<std::string> model_preset_names() {
  return {"dense-1t", "llama-3.1-405b", "llama-3.1-70b", "llama-3.1-8b"};
}

void WorkloadShape::validate(Phase phase) const {
  if (batch < 1) throw ValidationError("workload shape: batch must be >= 1");
  if (input_len < 1) throw ValidationError("workload shape: input_len must be >= 1");
  if (output_len < 0) throw ValidationError("workload shape: output_len must be >= 0");
  if (phase == Phase::decode && kv_len < input_len) {
    throw ValidationError("workload shape: kv_len must be >= input_len when decoding");
  }
}

FlopBreakdown& FlopBreakdown::operator+=(const FlopBreakdown& o) {
  qkv_proj += o.qkv_proj;
  attention += o.attention;
  out_proj += o.out_proj;
  ffn += o.ffn;
  logits += o.logits;
  norm_residual += o.norm_residual;
  return *this;
}

FlopBreakdown FlopBreakdown::scaled(double f) const {
  return {qkv_proj * f, attention * f, out_proj * f, ffn * f, logits * f, norm_residual * f};
}

ByteBreakdown& ByteBreakdown::operator+=(const ByteBreakdown& o) {
  weights += o.weights;
  activations += o.activations;
  kv_cache += o.kv_cache;
  attention_scratch += o.attention_scratch;
  return *this;
}

ByteBreakdown ByteBreakdown::scaled(double f) const {
  return {weights * f, activations * f, kv_cache * f, attention_scratch * f};
}

CostBreakdown& CostBreakdown::operator+=(const CostBreakdown& o) {
  flops += o.flops;
  bytes += o.bytes;
  return *this;
}

CostBreakdown CostBreakdown::scaled(double f) const { return {flops.scaled(f), bytes.scaled(f)}; }

LayerWeights layer_weight_elements(const ModelSpec& m) {
  LayerWeights w;
  w.qkv = m.hidden_size * (m.hidden_size + m.kv_width());
  w.out = m.hidden_size * m.hidden_size;
  w.ffn = m.hidden_size * m.ffn_size * m.ffn_mat_count;
  w.norms = (m.norm_has_bias ? 4 : 2) * m.hidden_size;
  return w;
}

std::int64_t param_count(const ModelSpec& m) {
  m.validate();
  const std::int64_t embedding = m.vocab_size * m.hidden_size;
  const std::int64_t final_norm = (m.norm_has_bias ? 2 : 1) * m.hidden_size;
  const std::int64_t head = m.tied_embeddings ? 0 : embedding;
  return embedding + m.num_layers * layer_weight_elements(m).total() + final_norm + head;
}

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::qkv_proj: return "qkv_proj";
    case KernelKind::attention: return "attention";
    case KernelKind::out_proj: return "out_proj";
    case KernelKind::ffn: return "ffn";
    case KernelKind::norm_residual: return "norm_residual";
    case KernelKind::logits: return "logits";
  }
  return "unknown";
}

std::vector<Kernel> layer_kernels(const ModelSpec& m, Phase phase, const WorkloadShape& shape,
                                  const CostOptions& options) {
  m.validate();
  shape.validate(phase);
  if (options.attention_scratch_passes < 0) {
    throw ValidationError("attention_scratch_passes must be >= 0");
  }

  const std::int64_t b = shape.batch;
  const std::int64_t s = phase == Phase::decode ? 1 : shape.input_len;
  const std::int64_t ctx = phase == Phase::decode ? shape.kv_len : shape.input_len;
  const std::int64_t h = m.hidden_size;
  const LayerWeights w = layer_weight_elements(m);
  const int wb = m.weight_dtype_bytes;
  const int ab = m.activation_dtype_bytes;

  std::vector<Kernel> kernels;
  kernels.reserve(5);

  kernels.push_back({KernelKind::qkv_proj, ComputeUnit::matrix,
                     exact_product({2, b, s, h, h + m.kv_width()}),
                     exact_product({w.qkv, wb}), 0, 0, 0});

  Kernel attn{KernelKind::attention, ComputeUnit::matrix, exact_product({4, b, s, ctx, h})};
  // Decode reads the whole cache; prefill writes the new tokens' K/V.
  attn.kv_bytes = phase == Phase::decode
                      ? exact_product({m.kv_width(), m.kv_dtype_bytes, b, ctx})
                      : exact_product({m.kv_width(), m.kv_dtype_bytes, b, s});
  attn.scratch_bytes =
      exact_product({options.attention_scratch_passes, b, m.num_heads, s, ctx, ab});
  kernels.push_back(attn);

  kernels.push_back({KernelKind::out_proj, ComputeUnit::matrix, exact_product({2, b, s, h, h}),
                     exact_product({w.out, wb}), 0, 0, 0});

  kernels.push_back({KernelKind::ffn, ComputeUnit::matrix,
                     exact_product({2, b, s, h, m.ffn_size, m.ffn_mat_count}),
                     exact_product({w.ffn, wb}), 0, 0, 0});

  // Norms and residual adds stream the layer's input and output tensors.
  kernels.push_back({KernelKind::norm_residual, ComputeUnit::vector,
                     options.norm_residual_flops_per_element * exact_product({b, s, h}),
                     exact_product({w.norms, wb}), exact_product({2, b, s, h, ab}), 0, 0});
  return kernels;
}

Kernel head_kernel(const ModelSpec& m, Phase phase, const WorkloadShape& shape,
                   const CostOptions& options) {
  m.validate();
  shape.validate(phase);
  const std::int64_t s = phase == Phase::decode ? 1 : shape.input_len;
  const bool all_positions = phase == Phase::train || options.logits_all_positions;
  const std::int64_t positions = all_positions ? s : 1;

  Kernel k{KernelKind::logits, ComputeUnit::matrix,
           exact_product({2, shape.batch, positions, m.hidden_size, m.vocab_size})};
  k.weight_bytes = exact_product({m.vocab_size, m.hidden_size, m.weight_dtype_bytes});
  if (options.include_embedding_reads) {
    k.weight_bytes += exact_product({shape.batch, s, m.hidden_size, m.weight_dtype_bytes});
  }
  return k;
}

namespace {

void accumulate(const Kernel& k, FlopBreakdown& flops, ByteBreakdown& bytes) {
  switch (k.kind) {
    case KernelKind::qkv_proj: flops.qkv_proj += k.flops; break;
    case KernelKind::attention: flops.attention += k.flops; break;
    case KernelKind::out_proj: flops.out_proj += k.flops; break;
    case KernelKind::ffn: flops.ffn += k.flops; break;
    case KernelKind::norm_residual: flops.norm_residual += k.flops; break;
    case KernelKind::logits: flops.logits += k.flops; break;
  }
  bytes.weights += k.weight_bytes;
  bytes.activations += k.activation_bytes;
  bytes.kv_cache += k.kv_bytes;
  bytes.attention_scratch += k.scratch_bytes;
}

}  // namespace

CostBreakdown layer_cost(const ModelSpec& model, Phase phase, const WorkloadShape& shape,
                         const CostOptions& options) {
  CostBreakdown cost;
  for (const Kernel& k : layer_kernels(model, phase, shape, options)) {
    accumulate(k, cost.flops, cost.bytes);
  }
  return cost;
}

FlopBreakdown layer_flops(const ModelSpec& model, Phase phase, const WorkloadShape& shape,
                          const CostOptions& options) {
  return layer_cost(model, phase, shape, options).flops;
}

ByteBreakdown layer_bytes(const ModelSpec& model, Phase phase, const WorkloadShape& shape,
                          const CostOptions& options) {
  return layer_cost(model, phase, shape, options).bytes;
}

CostBreakdown forward_cost(const ModelSpec& model, Phase phase, const WorkloadShape& shape,
                           const CostOptions& options) {
  CostBreakdown total =
      layer_cost(model, phase, shape, options).scaled(static_cast<double>(model.num_layers));
  CostBreakdown head;
  accumulate(head_kernel(model, phase, shape, options), head.flops, head.bytes);
  total += head;
  return total;
}

double kv_bytes_per_sequence(const ModelSpec& m, std::int64_t tokens) {
  return exact_product({m.num_layers, m.kv_width(), m.kv_dtype_bytes, tokens});
}

std::vector<IntensityPoint> arithmetic_intensity_curve(const ModelSpec& model, Phase phase,
                                                       std::span<const std::int64_t> batch_grid,
                                                       std::span<const std::int64_t> length_grid,
                                                       const CostOptions& options) {
  if (batch_grid.empty() || length_grid.empty()) {
    throw ValidationError("arithmetic intensity: batch and length grids must be non-empty");
  }
  std::vector<IntensityPoint> points;
  points.reserve(batch_grid.size() * length_grid.size());
  for (std::int64_t b : batch_grid) {
    for (std::int64_t len : length_grid) {
      WorkloadShape shape;
      shape.batch = b;
      if (phase == Phase::decode) {
        shape.input_len = 1;
        shape.kv_len = len;
      } else {
        shape.input_len = len;
      }
      const CostBreakdown c = layer_cost(model, phase, shape, options)
                                  .scaled(static_cast<double>(model.num_layers));
      const double bytes = c.bytes.total();
      if (bytes <= 0) {
        throw ValidationError("arithmetic intensity: zero bytes moved (malformed spec)");
      }
      points.push_back({b, len, c.flops.total(), bytes, c.flops.total() / bytes});
    }
  }
  return points;
}

void DlrmSpec::validate() const {
  auto need = [](bool ok, const char* field) {
    if (!ok) throw ValidationError(std::string("dlrm spec: ") + field + " must be >= 1");
  };
  need(num_tables >= 1, "num_tables");
  need(rows_per_table >= 1, "rows_per_table");
  need(embed_dim >= 1, "embed_dim");
  need(pooling_factor >= 1, "pooling_factor");
  need(dtype_bytes >= 1, "dtype_bytes");
  need(batch >= 1, "batch");
}

double DlrmSpec::table_bytes() const {
  return exact_product({rows_per_table, embed_dim, dtype_bytes});
}

double DlrmSpec::total_table_bytes() const {
  return exact_product({num_tables, rows_per_table, embed_dim, dtype_bytes});
}

double dlrm_pooling_bytes(const DlrmSpec& spec) {
  spec.validate();
  return exact_product(
      {spec.batch, spec.num_tables, spec.pooling_factor, spec.embed_dim, spec.dtype_bytes});
}

}  // namespace pfsim
