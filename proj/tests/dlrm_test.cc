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

#include "fixtures.h"
#include "pfsim/dlrm.h"
#include "pfsim/errors.h"

namespace pfsim {
namespace {

TEST(Devices, FitsInOne) {
  EXPECT_EQ(required_devices(DlrmSpec{1, 1000, 32, 1, 2, 1}, 80e9), 1);
}

TEST(Devices, TenTerabytesOn80GB) {
  EXPECT_EQ(required_devices(10e12, 80e9, true), 128);
  EXPECT_EQ(required_devices(10e12, 80e9, false), 125);
}

TEST(Devices, DoublingTablesAtLeastDoubles) {
  for (double bytes : {3e11, 1e12, 7e12}) {
    EXPECT_GE(required_devices(2 * bytes, 80e9, false), 2 * required_devices(bytes, 80e9, false) - 1);
    EXPECT_GE(required_devices(2 * bytes, 80e9, true), 2 * required_devices(bytes, 80e9, true));
  }
}

TEST(Pooling, SingleDeviceIsLocalRoofline) {
  const SystemSpec s = system_preset("h100-dgx");
  const DlrmSpec spec{64, 1000, 32, 32, 2, 128};
  DlrmPlacement p;
  p.device_count = 1;
  const PoolingTime t = pooling_time(spec, p, s);
  EXPECT_EQ(t.remote, 0);
  EXPECT_EQ(t.latency, 0);
  const double bytes = 16777216;
  EXPECT_EQ(t.total, bytes / effective_bandwidth(s.local_tier(), bytes, s.bandwidth_curve));
}

TEST(Pooling, SharedFabricUsesFabricTier) {
  const SystemSpec pfa = system_preset("pfa");
  const DlrmSpec spec{64, 1000, 32, 32, 2, 128};
  DlrmPlacement p;
  p.mode = PlacementMode::shared_fabric;
  const PoolingTime t = pooling_time(spec, p, pfa);
  const MemoryTier& f = *pfa.find_tier(MemoryRole::fabric_shared);
  EXPECT_EQ(t.total, 16777216 / effective_bandwidth(f, 16777216, pfa.bandwidth_curve) + f.fixed_latency);
  EXPECT_THROW(pooling_time(spec, p, system_preset("h100-dgx")), ValidationError);
}

TEST(Pooling, SlowerLinkMeansLargerSpeedup) {
  const SystemSpec dgx = system_preset("h100-dgx"), pfa = system_preset("pfa");
  const DlrmSpec spec{16, 1000000, 32, 64, 2, 1024};
  DlrmPlacement shared;
  shared.mode = PlacementMode::shared_fabric;
  DlrmPlacement nv{PlacementMode::distributed_rowwise, 128, Interconnect::nvlink(), 1};
  DlrmPlacement pcie{PlacementMode::distributed_rowwise, 128, Interconnect::pcie(), 1};
  EXPECT_GT(pooling_speedup(spec, pcie, dgx, shared, pfa), pooling_speedup(spec, nv, dgx, shared, pfa));
}

TEST(Pooling, CoalescingCutsLatency) {
  const SystemSpec dgx = system_preset("h100-dgx");
  const DlrmSpec spec{16, 1000000, 32, 64, 2, 1024};
  DlrmPlacement a{PlacementMode::distributed_rowwise, 8, Interconnect::nvlink(), 1};
  DlrmPlacement b = a;
  b.coalescing = 4;
  EXPECT_DOUBLE_EQ(pooling_time(spec, a, dgx).latency, 4 * pooling_time(spec, b, dgx).latency);
  b.coalescing = 0.5;
  EXPECT_THROW(pooling_time(spec, b, dgx), ValidationError);
}

TEST(Sweep, GridShape) {
  DlrmGrid g;
  DlrmPlacement ref{PlacementMode::distributed_rowwise, 128, Interconnect::nvlink(), 1};
  DlrmPlacement cand;
  cand.mode = PlacementMode::shared_fabric;
  const auto rows = dlrm_sweep(g, ref, system_preset("h100-dgx"), cand, system_preset("pfa"));
  EXPECT_EQ(rows.size(), 7u * 3 * 2);
  for (const DlrmRow& r : rows) EXPECT_DOUBLE_EQ(r.speedup, r.reference_time / r.candidate_time);
}

}  // namespace
}  // namespace pfsim
