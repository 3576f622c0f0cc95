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

#include <cmath>
#include <random>

#include "fixtures.h"
#include "pfsim/errors.h"
#include "pfsim/system.h"

namespace pfsim {
namespace {

constexpr double kKi = 1024.0, kMi = kKi * kKi, kGi = kMi * kKi;

MemoryTier hbm(double bw, double latency = 0) {
  MemoryTier t;
  t.capacity = 80e9;
  t.bandwidth = bw;
  t.fixed_latency = latency;
  return t;
}

TEST(EffectiveBandwidth, IdentityCurveIsRaw) {
  EXPECT_EQ(effective_bandwidth(hbm(3350e9), 12345, EfficiencyCurve::identity()), 3350e9);
}

TEST(EffectiveBandwidth, LogLinearInterpolation) {
  const EfficiencyCurve c({{kKi, 0.1}, {kGi, 0.9}});
  EXPECT_NEAR(c(kMi), 0.5, 1e-12);
  EXPECT_NEAR(effective_bandwidth(hbm(1e12), kMi, c), 0.5e12, 1e-3);
}

TEST(EffectiveBandwidth, ClampsOutsideTable) {
  const EfficiencyCurve c({{kKi, 0.1}, {kGi, 0.9}});
  EXPECT_EQ(c(1), 0.1);
  EXPECT_EQ(c(1e15), 0.9);
}

TEST(EfficiencyCurve, FloorApplies) {
  const EfficiencyCurve c({{1e6, 0.1}, {1e9, 0.5}}, 0.2);
  EXPECT_EQ(c(10), 0.2);
  EXPECT_EQ(c(1e9), 0.5);
}

TEST(EfficiencyCurve, RejectsBadKnots) {
  EXPECT_THROW(EfficiencyCurve({{2, 0.5}, {1, 0.6}}), ValidationError);
  EXPECT_THROW(EfficiencyCurve({{1, 0.0}}), ValidationError);
  EXPECT_THROW(EfficiencyCurve({{1, 1.5}}), ValidationError);
  EXPECT_THROW(EfficiencyCurve(std::vector<EfficiencyCurve::Knot>{}), ValidationError);
}

TEST(EfficiencyCurve, MonotoneAndContinuous) {
  const EfficiencyCurve c = h100_bandwidth_curve();
  double prev = 0;
  for (double s = 1; s < 1e10; s *= 1.37) {
    const double u = c(s);
    EXPECT_GE(u, prev);
    prev = u;
  }
  for (const auto& k : c.knots()) {
    EXPECT_NEAR(c(k.size * (1 - 1e-13)), k.utilization, 1e-12 * k.utilization);
    EXPECT_NEAR(c(k.size * (1 + 1e-13)), k.utilization, 1e-12 * k.utilization);
  }
}

TEST(EfficiencyCurve, CsvRoundTrip) {
  const EfficiencyCurve c =
      EfficiencyCurve::from_csv_text("size,utilization\n1024,0.1\n1073741824,0.9\n");
  EXPECT_NEAR(c(kMi), 0.5, 1e-12);
  EXPECT_THROW(EfficiencyCurve::from_csv_text("size,utilization\n1024;0.1\n"), ValidationError);
  EXPECT_THROW(EfficiencyCurve::from_csv_text("size,utilization\nabc,0.1\n"), ValidationError);
}

TEST(EfficiencyCurve, ShippedCalibrationFilesLoad) {
  const std::string dir = std::string(PFSIM_SOURCE_DIR) + "/configs/curves/";
  const EfficiencyCurve h100 = EfficiencyCurve::from_csv_file(dir + "h100_bandwidth.csv");
  const EfficiencyCurve h200 = EfficiencyCurve::from_csv_file(dir + "h200_bandwidth.csv");
  for (double s : {1e3, 1e5, 1e7, 1e9}) {
    EXPECT_NEAR(h100(s), h100_bandwidth_curve()(s), 1e-12);
    EXPECT_NEAR(h200(s), h200_bandwidth_curve()(s), 1e-12);
    EXPECT_LT(h200(s), h100(s));
  }
  EXPECT_NO_THROW(EfficiencyCurve::from_csv_file(dir + "hopper_flops.csv"));
}

TEST(EffectiveFlops, IdentityAndHalf) {
  const SystemSpec h100 = system_preset("h100-dgx");
  EXPECT_EQ(effective_flops(h100.processor, Dtype::fp16, 1e9, EfficiencyCurve::identity()), 989e12);
  const EfficiencyCurve half({{1, 0.5}});
  EXPECT_EQ(effective_flops(h100.processor, Dtype::fp8, 1e9, half), 989.5e12);
}

TEST(EffectiveFlops, TinyGemmHitsFloor) {
  const SystemSpec h100 = system_preset("h100-dgx");
  const EfficiencyCurve c({{1e9, 0.5}, {1e12, 0.9}}, 0.05);
  EXPECT_EQ(effective_flops(h100.processor, Dtype::fp16, 10, c), 989e12 * 0.5);
  const EfficiencyCurve low({{1e9, 0.01}, {1e12, 0.9}}, 0.05);
  EXPECT_EQ(effective_flops(h100.processor, Dtype::fp16, 10, low), 989e12 * 0.05);
}

TEST(EffectiveFlops, UnknownDtype) {
  ProcessorSpec p;
  p.peak_matrix_flops = {{Dtype::fp16, 1e12}};
  p.peak_vector_flops = 1e12;
  EXPECT_THROW(effective_flops(p, Dtype::fp8, 1, EfficiencyCurve::identity()), ValidationError);
}

TEST(Roofline, ComputeAndMemoryIdentities) {
  SystemSpec s = testing::unit_system();
  EXPECT_EQ(roofline_time(1e12, 0, Dtype::fp16, s, s.memory_tiers[0]), 1.0);
  s.memory_tiers[0].bandwidth = 3350e9;
  EXPECT_EQ(roofline_time(0, 3350e9, Dtype::fp16, s, s.memory_tiers[0]), 1.0);
  EXPECT_THROW(roofline_time(0, 0, Dtype::fp16, s, s.memory_tiers[0]), ValidationError);
}

TEST(Roofline, MaxOfTermsPlusLatency) {
  SystemSpec s = testing::unit_system();
  s.memory_tiers[0].fixed_latency = 1e-6;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0, 1e12);
  for (int i = 0; i < 100; ++i) {
    const double f = u(rng), b = u(rng);
    EXPECT_EQ(roofline_time(f, b, Dtype::fp16, s, s.memory_tiers[0]),
              std::max(f / 1e12, b / 1e12) + 1e-6);
  }
}

TEST(Roofline, MonotoneInFlopsAndBytes) {
  const SystemSpec s = system_preset("h100-dgx");
  const MemoryTier& t = s.serving_tier();
  double prev = 0;
  for (double f = 1e6; f < 1e15; f *= 3) {
    const double x = roofline_time(f, 1e6, Dtype::fp16, s, t);
    EXPECT_GE(x, prev);
    prev = x;
  }
  prev = 0;
  for (double b = 1e3; b < 1e12; b *= 3) {
    const double x = roofline_time(1e6, b, Dtype::fp16, s, t);
    EXPECT_GE(x, prev);
    prev = x;
  }
}

TEST(Roofline, VectorKernelsUseVectorPeak) {
  SystemSpec s = testing::unit_system();
  s.processor.peak_vector_flops = 0.5e12;
  EXPECT_EQ(roofline_time(1e12, 0, Dtype::fp16, s, s.memory_tiers[0], ComputeUnit::vector), 2.0);
}

TEST(Roofline, RidgeNear295) {
  const SystemSpec s = system_preset("h100-dgx");
  const double ridge = ridge_intensity(s, Dtype::fp16);
  EXPECT_NEAR(ridge, 989e12 / 3350e9, 1e-9);
  EXPECT_NEAR(ridge, 295.22, 0.2952);
}

TEST(MemoryTier, FullHitFabricMatchesHbm) {
  MemoryTier fabric = hbm(1e12);
  fabric.role = MemoryRole::fabric_shared;
  fabric.cache_hit_rate = 1.0;
  fabric.backing_bandwidth = 1e11;
  EXPECT_EQ(fabric.blended_bandwidth(), hbm(1e12).blended_bandwidth());
  fabric.cache_hit_rate = 0.5;
  EXPECT_DOUBLE_EQ(fabric.blended_bandwidth(), 0.5 * 1e12 + 0.5 * 1e11);
}

TEST(MemoryTier, InvariantsEnforced) {
  MemoryTier t = hbm(1e12);
  t.capacity = 0;
  EXPECT_THROW(t.validate(), ValidationError);
  t = hbm(1e12);
  t.fixed_latency = -1;
  EXPECT_THROW(t.validate(), ValidationError);
  t = hbm(1e12);
  t.cache_hit_rate = 1.5;
  EXPECT_THROW(t.validate(), ValidationError);
}

TEST(SystemSpec, AtMostOneTierPerRole) {
  SystemSpec s = testing::unit_system();
  s.memory_tiers.push_back(s.memory_tiers[0]);
  EXPECT_THROW(s.validate(), ValidationError);
  s.memory_tiers.clear();
  EXPECT_THROW(s.validate(), ValidationError);
}

TEST(SystemSpec, PresetsValidate) {
  for (const std::string& name : system_preset_names()) EXPECT_NO_THROW(system_preset(name).validate());
  const SystemSpec pfa = system_preset("pfa");
  EXPECT_EQ(pfa.serving_tier().role, MemoryRole::fabric_shared);
  EXPECT_EQ(pfa.serving_tier().capacity, 32e12);
  EXPECT_EQ(pfa.serving_tier().bandwidth, 26800e9);
  EXPECT_EQ(pfa.processor.peak_for(Dtype::fp8), 8 * 1979e12);
  EXPECT_THROW(system_preset("tpu"), ValidationError);
}

TEST(NetworkSpec, ExtentPicksLink) {
  NetworkSpec n;
  n.link_bandwidth = 450e9;
  n.per_message_latency = 1e-6;
  n.gpus_per_tray = 8;
  n.trays_per_rack = 2;
  n.scale_out_bandwidth = 50e9;
  n.scale_out_latency = 5e-6;
  EXPECT_EQ(n.link_for_extent(8).bandwidth, 450e9);
  EXPECT_EQ(n.link_for_extent(16).bandwidth, 50e9);
  n.scale_out_bandwidth.reset();
  n.scale_out_latency.reset();
  EXPECT_EQ(n.link_for_extent(16).bandwidth, 450e9);
}

}  // namespace
}  // namespace pfsim
