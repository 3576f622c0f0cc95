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

#include <gtest/gtest.h>

#include <random>

#include "fixtures.h"
#include "oracles.h"
#include "pfsim/errors.h"
#include "pfsim/workload.h"

namespace pfsim {
namespace {

using testing::tiny_model;

TEST(ParamCount, TinyModelByTensorList) {
  EXPECT_EQ(param_count(tiny_model()), 356);
  EXPECT_EQ(oracle::param_count(4, 2, 1, 1, 4, 8, 2, 10, false), 356);
}

TEST(ParamCount, TiedHeadDropsOneVocabMatrix) {
  ModelSpec m = tiny_model();
  m.tied_embeddings = true;
  EXPECT_EQ(param_count(m), 356 - 40);
}

TEST(ParamCount, ZeroLayersRejected) {
  ModelSpec m = tiny_model();
  m.num_layers = 0;
  EXPECT_THROW(param_count(m), ValidationError);
}

TEST(ParamCount, PresetsMatchTensorOracle) {
  for (const std::string& name : model_preset_names()) {
    const ModelSpec m = model_preset(name);
    EXPECT_EQ(param_count(m),
              oracle::param_count(m.hidden_size, m.num_layers, m.num_heads, m.num_kv_heads,
                                  m.head_dim, m.ffn_size, m.ffn_mat_count, m.vocab_size,
                                  m.tied_embeddings))
        << name;
  }
}

TEST(ParamCount, Llama70bNearPublishedSize) {
  EXPECT_NEAR(static_cast<double>(param_count(model_preset("llama-3.1-70b"))), 70.6e9, 0.706e9);
}

TEST(ModelSpec, InvariantsEnforced) {
  ModelSpec m = tiny_model();
  m.head_dim = 3;  // heads * head_dim != h
  EXPECT_THROW(m.validate(), ValidationError);
  m = tiny_model();
  m.num_heads = 2;
  m.head_dim = 2;
  m.num_kv_heads = 3;
  EXPECT_THROW(m.validate(), ValidationError);
  m = tiny_model();
  m.weight_dtype_bytes = 3;
  EXPECT_THROW(m.validate(), ValidationError);
}

TEST(LayerFlops, TinyPrefillEnumerated) {
  const WorkloadShape shape{1, 2, 0, 0};
  const FlopBreakdown f = layer_flops(tiny_model(), Phase::prefill, shape);
  EXPECT_EQ(f.qkv_proj, 192);
  EXPECT_EQ(f.attention, 64);
  EXPECT_EQ(f.out_proj, 64);
  EXPECT_EQ(f.ffn, 256);
  EXPECT_EQ(f.matmul() - f.logits, 576);
  EXPECT_EQ(f.matmul(), oracle::layer_matmul_flops({4, 1, 1, 4, 8, 2}, 1, 2, 2));
}

TEST(LayerFlops, SingleTokenAttentionIsFourH) {
  const FlopBreakdown f = layer_flops(tiny_model(), Phase::prefill, {1, 1, 0, 0});
  EXPECT_EQ(f.attention, 4 * 4);
}

TEST(LayerFlops, DecodeAttentionOverKvLength) {
  const FlopBreakdown f = layer_flops(tiny_model(), Phase::decode, {1, 1, 1, 8});
  EXPECT_EQ(f.attention, 128);
  EXPECT_EQ(f.matmul(), oracle::layer_matmul_flops({4, 1, 1, 4, 8, 2}, 1, 1, 8));
}

TEST(LayerFlops, RandomShapesMatchEnumeration) {
  std::mt19937 rng(7);
  for (int i = 0; i < 30; ++i) {
    const std::int64_t heads = 1 << (rng() % 3);
    const std::int64_t kvh = heads >> (rng() % 2);
    const std::int64_t hd = 2 + rng() % 3;
    ModelSpec m = tiny_model();
    m.num_heads = heads;
    m.num_kv_heads = std::max<std::int64_t>(kvh, 1);
    m.head_dim = hd;
    m.hidden_size = heads * hd;
    m.ffn_size = 3 + rng() % 5;
    m.ffn_mat_count = 2 + rng() % 2;
    const std::int64_t b = 1 + rng() % 3, s = 1 + rng() % 4;
    const FlopBreakdown f = layer_flops(m, Phase::prefill, {b, s, 0, 0});
    const oracle::TinyShape t{m.hidden_size, heads, m.num_kv_heads, hd, m.ffn_size, m.ffn_mat_count};
    EXPECT_EQ(f.matmul() - f.logits, oracle::layer_matmul_flops(t, b, s, s));
  }
}

TEST(LayerFlops, BreakdownTotalsAreSums) {
  const FlopBreakdown f = layer_flops(model_preset("llama-3.1-8b"), Phase::prefill, {4, 512, 0, 0});
  EXPECT_DOUBLE_EQ(f.total(), f.qkv_proj + f.attention + f.out_proj + f.ffn + f.logits +
                                  f.norm_residual);
  EXPECT_GT(f.norm_residual, 0);
}

TEST(LayerBytes, TinyKvBytes) {
  EXPECT_EQ(kv_bytes_per_sequence(tiny_model(), 8), 256);
}

TEST(LayerBytes, ScratchDisabled) {
  CostOptions o;
  o.attention_scratch_passes = 0;
  const ByteBreakdown b = layer_bytes(tiny_model(), Phase::prefill, {1, 16, 0, 0}, o);
  EXPECT_EQ(b.attention_scratch, 0);
}

TEST(LayerBytes, DecodeDominatedByKvAtLargeBatch) {
  const ModelSpec m = model_preset("llama-3.1-8b");
  double prev = 0;
  for (std::int64_t b : {1, 16, 256, 4096, 65536}) {
    const ByteBreakdown bytes = layer_bytes(m, Phase::decode, {b, 1024, 1, 1024});
    const double share = bytes.kv_cache / (bytes.kv_cache + bytes.weights);
    EXPECT_GT(share, prev);
    prev = share;
  }
  EXPECT_GT(prev, 0.998);
}

TEST(LayerBytes, ComponentsNonNegative) {
  const ByteBreakdown b = layer_bytes(model_preset("llama-3.1-70b"), Phase::decode, {8, 128, 4, 130});
  EXPECT_GE(b.weights, 0);
  EXPECT_GE(b.activations, 0);
  EXPECT_GE(b.kv_cache, 0);
  EXPECT_GE(b.attention_scratch, 0);
  EXPECT_DOUBLE_EQ(b.total(), b.weights + b.activations + b.kv_cache + b.attention_scratch);
}

TEST(Shape, DecodeNeedsKvAtLeastInput) {
  EXPECT_THROW(layer_flops(tiny_model(), Phase::decode, {1, 8, 1, 4}), ValidationError);
  EXPECT_THROW(layer_flops(tiny_model(), Phase::prefill, {0, 8, 1, 0}), ValidationError);
}

TEST(Intensity, DecodeMonotoneOverServingGrid) {
  const ModelSpec m = model_preset("llama-3.1-70b");
  const std::vector<std::int64_t> batches = {16, 32, 64, 128, 256};
  const std::vector<std::int64_t> lengths = {128, 256, 512, 1024, 2048, 4096, 8192};
  const auto pts = arithmetic_intensity_curve(m, Phase::decode, batches, lengths);
  ASSERT_EQ(pts.size(), batches.size() * lengths.size());
  auto at = [&](std::size_t bi, std::size_t li) { return pts[bi * lengths.size() + li].intensity; };
  for (std::size_t bi = 0; bi < batches.size(); ++bi)
    for (std::size_t li = 1; li < lengths.size(); ++li) EXPECT_LT(at(bi, li), at(bi, li - 1));
  for (std::size_t li = 0; li < lengths.size(); ++li)
    for (std::size_t bi = 1; bi < batches.size(); ++bi) EXPECT_GT(at(bi, li), at(bi - 1, li));
}

TEST(Intensity, PrefillHasSinglePeak) {
  const ModelSpec m = model_preset("llama-3.1-70b");
  std::vector<std::int64_t> lengths;
  for (std::int64_t s = 128; s <= 131072; s *= 2) lengths.push_back(s);
  const std::vector<std::int64_t> batch = {1};
  const auto pts = arithmetic_intensity_curve(m, Phase::prefill, batch, lengths);
  std::size_t peak = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].intensity > pts[peak].intensity) peak = i;
  for (std::size_t i = 1; i <= peak; ++i) EXPECT_GT(pts[i].intensity, pts[i - 1].intensity);
  for (std::size_t i = peak + 1; i < pts.size(); ++i) EXPECT_LT(pts[i].intensity, pts[i - 1].intensity);
  EXPECT_GE(pts[peak].length, 2048);
  EXPECT_LE(pts[peak].length, 32768);
}

TEST(Dlrm, PoolingBytes) {
  DlrmSpec s{64, 1000, 32, 32, 2, 128};
  EXPECT_EQ(dlrm_pooling_bytes(s), 16777216);
  EXPECT_EQ(dlrm_pooling_bytes({1, 1, 1, 1, 1, 1}), 1);
  DlrmSpec d = s;
  d.pooling_factor = 64;
  EXPECT_EQ(dlrm_pooling_bytes(d), 2 * dlrm_pooling_bytes(s));
  EXPECT_EQ(s.table_bytes(), 1000 * 32 * 2);
}

TEST(Dlrm, InvalidSpecRejected) {
  EXPECT_THROW(dlrm_pooling_bytes({0, 1, 1, 1, 1, 1}), ValidationError);
}

}  // namespace
}  // namespace pfsim
