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

// Reference computations written independently of the library, by direct
// enumeration where possible.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

namespace pfsim::oracle {

// Multiply-add count of an (m x k) . (k x n) product, by looping.
inline std::int64_t matmul_flops(std::int64_t m, std::int64_t k, std::int64_t n) {
  std::int64_t macs = 0;
  for (std::int64_t i = 0; i < m; ++i)
    for (std::int64_t j = 0; j < n; ++j)
      for (std::int64_t x = 0; x < k; ++x) ++macs;
  return 2 * macs;
}

struct TinyShape {
  std::int64_t h, heads, kv_heads, head_dim, f, mats;
};

// Forward FLOPs of one layer's matrix work (no causal discount) for b
// sequences of s new tokens attending over ctx positions.
inline std::int64_t layer_matmul_flops(const TinyShape& t, std::int64_t b, std::int64_t s,
                                       std::int64_t ctx) {
  const std::int64_t kv = 2 * t.kv_heads * t.head_dim;
  std::int64_t f = 0;
  f += b * matmul_flops(s, t.h, t.h + kv);  // fused qkv
  for (std::int64_t hd = 0; hd < t.heads; ++hd) {
    f += b * matmul_flops(s, t.head_dim, ctx);  // scores
    f += b * matmul_flops(s, ctx, t.head_dim);  // weighted values
  }
  f += b * matmul_flops(s, t.h, t.h);             // out proj
  f += b * t.mats * matmul_flops(s, t.h, t.f);    // ffn (down proj has the same size)
  return f;
}

// Parameter count from an explicit tensor list.
inline std::int64_t param_count(std::int64_t h, std::int64_t layers, std::int64_t heads,
                                std::int64_t kv_heads, std::int64_t head_dim, std::int64_t f,
                                std::int64_t mats, std::int64_t vocab, bool tied) {
  std::vector<std::int64_t> tensors;
  tensors.push_back(vocab * h);  // embedding
  for (std::int64_t l = 0; l < layers; ++l) {
    tensors.push_back(h * heads * head_dim);     // q
    tensors.push_back(h * kv_heads * head_dim);  // k
    tensors.push_back(h * kv_heads * head_dim);  // v
    tensors.push_back(heads * head_dim * h);     // o
    for (std::int64_t i = 0; i < mats; ++i) tensors.push_back(h * f);
    tensors.push_back(h);  // attention norm
    tensors.push_back(h);  // ffn norm
  }
  tensors.push_back(h);  // final norm
  if (!tied) tensors.push_back(vocab * h);
  std::int64_t total = 0;
  for (auto t : tensors) total += t;
  return total;
}

// Ring all-reduce as its individual rounds: n-1 reduce-scatter and n-1
// all-gather steps, each sending one chunk.
inline double ring_allreduce(double bytes, std::int64_t n, double bw, double lat) {
  double t = 0;
  if (n <= 1) return 0;
  const double chunk = bytes / static_cast<double>(n);
  for (std::int64_t phase = 0; phase < 2; ++phase)
    for (std::int64_t step = 0; step < n - 1; ++step) t += chunk / bw + lat;
  return t;
}

struct PipelineResult {
  double makespan;
  double bubble;  // idle time per stage over busy time per stage
};

// Event-by-event 1F1B schedule. Each stage runs its warm-up forwards, then
// alternates one forward and one backward, then drains backwards. A forward
// waits for the previous stage's forward of the same microbatch; a backward
// waits for the next stage's backward.
inline PipelineResult one_f_one_b(double stage_time, std::int64_t p, std::int64_t m) {
  const double fwd = stage_time / 2, bwd = stage_time / 2;
  struct Op {
    bool forward;
    std::int64_t mb;
  };
  std::vector<std::deque<Op>> order(p);
  for (std::int64_t s = 0; s < p; ++s) {
    const std::int64_t warm = std::min(p - s - 1, m);
    std::int64_t nf = 0, nb = 0;
    for (; nf < warm; ++nf) order[s].push_back({true, nf});
    while (nf < m) {
      order[s].push_back({true, nf++});
      order[s].push_back({false, nb++});
    }
    while (nb < m) order[s].push_back({false, nb++});
  }
  std::vector<std::vector<std::optional<double>>> f_end(p, std::vector<std::optional<double>>(m));
  std::vector<std::vector<std::optional<double>>> b_end(p, std::vector<std::optional<double>>(m));
  std::vector<double> clock(p, 0.0);
  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (std::int64_t s = 0; s < p; ++s) {
      while (!order[s].empty()) {
        const Op op = order[s].front();
        std::optional<double> dep;
        if (op.forward) {
          dep = s == 0 ? std::optional<double>(0.0) : f_end[s - 1][op.mb];
        } else {
          dep = s == p - 1 ? f_end[s][op.mb] : b_end[s + 1][op.mb];
        }
        if (!dep) break;
        const double start = std::max(clock[s], *dep);
        clock[s] = start + (op.forward ? fwd : bwd);
        (op.forward ? f_end : b_end)[s][op.mb] = clock[s];
        order[s].pop_front();
        progressed = true;
      }
    }
  }
  double makespan = 0;
  for (double c : clock) makespan = std::max(makespan, c);
  const double busy = static_cast<double>(m) * stage_time;
  return {makespan, (makespan - busy) / busy};
}

// E = source + N x switch + dest, in integer pJ.
inline std::int64_t path_pj(std::int64_t src, std::int64_t n, std::int64_t sw, std::int64_t dst) {
  return src + n * sw + dst;
}

inline double mape(const std::vector<double>& pred, const std::vector<double>& meas) {
  long double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::fabs((long double)pred[i] - meas[i]) / meas[i];
  return static_cast<double>(s / pred.size());
}

inline double r_squared(const std::vector<double>& pred, const std::vector<double>& meas) {
  long double mean = 0;
  for (double y : meas) mean += y;
  mean /= meas.size();
  long double res = 0, tot = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    res += ((long double)meas[i] - pred[i]) * ((long double)meas[i] - pred[i]);
    tot += (meas[i] - mean) * (meas[i] - mean);
  }
  return static_cast<double>(1 - res / tot);
}

// floor(((1 - r) cap - w) / kv), 0 when the weights do not fit.
inline std::int64_t max_batch(double cap, double w, double kv, double reserve) {
  const double free = (1 - reserve) * cap - w;
  if (free < 0) return 0;
  return static_cast<std::int64_t>(std::floor(free / kv));
}

}  // namespace pfsim::oracle
