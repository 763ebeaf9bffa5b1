// Copyright 2026 The Offload Planner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "offload/calibration.hpp"
#include "offload/overlap.hpp"
#include "offload/workload.hpp"

namespace offload {
namespace {

HardwareProfile hw() { return preset("wanvideo").first; }

WorkloadPoint at(const ModelSpec& m, std::int64_t value) {
  return sweep_point(m, natural_sweep_variable(m), value, 2);
}

TEST(FirstOrder, ComputeTime) {
  EXPECT_NEAR(t_comp(8.407e12, hw()), 18.53e-3, 0.01e-3);
  EXPECT_EQ(t_comp(0, hw()), 0.0);
  EXPECT_EQ(t_comp(2e12, hw()), 2 * t_comp(1e12, hw()));
}

TEST(FirstOrder, PrefetchTime) {
  EXPECT_NEAR(t_pref(520e6, hw()), 18.55e-3, 0.01e-3);
  EXPECT_NEAR(t_pref(465e6, hw()), 16.59e-3, 0.01e-3);
  EXPECT_EQ(t_pref(0, hw()), 0.0);
}

TEST(FirstOrder, CriticalWorkload) {
  EXPECT_NEAR(f_star(hw(), 520e6), 8.42e12, 8.42e12 * 5e-3);
  EXPECT_NEAR(f_star(hw(), 465e6), 7.52e12, 7.52e12 * 5e-3);
  EXPECT_EQ(f_star(hw(), 0), 0.0);
}

TEST(Roofline, RidgeAndArms) {
  const HardwareProfile h = hw();
  EXPECT_NEAR(i_star(h), 16180, 1);
  EXPECT_EQ(attainable(h, i_star(h)), h.eta_comp * h.p_peak);
  EXPECT_EQ(attainable(h, 2 * i_star(h)), h.compute_roof());
  EXPECT_EQ(attainable(h, 0), 0.0);
  const std::vector<double> xs{0, 1000, i_star(h), 1e6};
  const auto pts = roofline_points(h, xs);
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_EQ(pts[1].attainable, 1000 * h.h2d_roof());
  EXPECT_EQ(pts[3].attainable, h.compute_roof());
}

TEST(Roofline, IdentityIStarTimesBPref) {
  for (const std::string& name : preset_names()) {
    const auto [h, m] = preset(name);
    const double b = static_cast<double>(prefetch_bytes(m));
    EXPECT_DOUBLE_EQ(i_star(h) * b, f_star(h, b)) << name;
  }
}

TEST(OverlapReport, WanVideoRegimes) {
  const ModelSpec m = preset("wanvideo").second;
  EXPECT_TRUE(overlap_report(m, at(m, 121), hw()).hidden);
  const OverlapReport small = overlap_report(m, at(m, 41), hw());
  EXPECT_FALSE(small.hidden);
  EXPECT_GT(small.exposed, 0.0);
  EXPECT_DOUBLE_EQ(small.exposed, small.t_pref - small.t_comp);
  const OverlapReport none = overlap_report(m, at(m, 41), hw(), 0.0);
  EXPECT_TRUE(none.hidden);
  EXPECT_EQ(none.exposed, 0.0);
}

TEST(OverlapReport, EquivalenceChainOnRandomSamples) {
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<std::string> names = preset_names();
  int hidden = 0;
  for (int i = 0; i < 10'000; ++i) {
    auto [h, m] = preset(names[i % names.size()]);
    h.p_peak = 100e12 + u(rng) * 1900e12;
    h.bw_h2d = 8e9 + u(rng) * 56e9;
    h.eta_comp = 0.05 + 0.95 * u(rng);
    h.eta_pref = 0.05 + 0.95 * u(rng);
    const int p = 1 + static_cast<int>(u(rng) * 8);
    const std::int64_t value = 1 + static_cast<std::int64_t>(u(rng) * 200);
    const double bytes = 1e6 + u(rng) * 2e9;
    const OverlapReport r = overlap_report(m, sweep_point(m, natural_sweep_variable(m), value, p),
                                           h, bytes);
    const bool by_flops = r.f_per_gpu >= r.f_star;
    const bool by_time = r.t_comp >= r.t_pref;
    const bool by_intensity = r.i_block >= r.i_star;
    ASSERT_EQ(r.hidden, by_flops) << i;
    ASSERT_EQ(r.hidden, by_time) << i;
    ASSERT_EQ(r.hidden, by_intensity) << i;
    ASSERT_EQ(r.exposed, std::max(0.0, r.t_pref - r.t_comp));
    hidden += r.hidden;
  }
  // The sample straddles the boundary.
  EXPECT_GT(hidden, 1000);
  EXPECT_LT(hidden, 9000);
}

TEST(CriticalConfig, PresetsMatchPublishedCrossings) {
  const auto check = [](const std::string& name, double expected, double tol) {
    const auto [h, m] = preset(name);
    const CriticalConfig c = critical_config(m, h);
    ASSERT_EQ(c.status, CrossingStatus::kCrossing);
    EXPECT_NEAR(c.value, expected, tol) << name;
    EXPECT_EQ(c.rounded_up, static_cast<std::int64_t>(std::ceil(c.value)));
  };
  check("wanvideo", 119.2, 1.0);
  check("flux", 11.5, 0.3);
  check("hunyuanvideo", 34.5, 1.0);
}

TEST(CriticalConfig, ConsistentWithOverlapReport) {
  for (const std::string& name : preset_names()) {
    const auto [h, m] = preset(name);
    const CriticalConfig c = critical_config(m, h);
    const auto hi = static_cast<std::int64_t>(std::ceil(c.value));
    const auto lo = static_cast<std::int64_t>(std::floor(c.value)) - 1;
    EXPECT_TRUE(overlap_report(m, at(m, hi), h).hidden) << name;
    EXPECT_FALSE(overlap_report(m, at(m, lo), h).hidden) << name;
  }
}

TEST(CriticalConfig, NoCrossingStatuses) {
  auto [h, m] = preset("flux");
  h.bw_h2d = 1e18;
  EXPECT_EQ(critical_config(m, h).status, CrossingStatus::kAlwaysHidden);
  h.bw_h2d = 1e-6;
  EXPECT_EQ(critical_config(m, h).status, CrossingStatus::kNeverHidden);
}

TEST(CriticalConfig, SolvesBisectionToTolerance) {
  const auto [h, m] = preset("wanvideo");
  const CriticalConfig c = critical_config(m, h);
  // Independent closed-form root of the DiT quadratic in S.
  const double d = 3072, f = 14336, l = 512;
  const double target = 2 * f_star(h, 520e6);
  const double a = 4 * d, b = 12 * d * d + 4 * l * d + 4 * d * f, k = 4 * l * d * d - target;
  const double s = (-b + std::sqrt(b * b - 4 * a * k)) / (2 * a);
  EXPECT_NEAR(c.value, s / 220 - 3, 1e-6 * c.value * 2);
}

TEST(MinResidency, ClosedFormAndLimits) {
  const auto [h, m] = preset("wanvideo");
  EXPECT_EQ(min_residency(m, at(m, 161), h), 0.0);
  const double r = min_residency(m, at(m, 41), h);
  const OverlapReport rep = overlap_report(m, at(m, 41), h);
  EXPECT_NEAR(r, 1 - rep.t_comp * h.h2d_roof() / 520e6, 1e-12);
  ModelSpec huge = m;
  huge.b_pref = std::int64_t{1} << 60;
  EXPECT_NEAR(min_residency(huge, at(m, 1), h), 1.0, 1e-6);
}

TEST(MinResidency, EpsilonBoundary) {
  for (const std::string& name : preset_names()) {
    const auto [h, m] = preset(name);
    const double b = static_cast<double>(prefetch_bytes(m));
    for (std::int64_t v : m.sweep_grid) {
      const WorkloadPoint w = at(m, v);
      const double r = min_residency(m, w, h);
      EXPECT_TRUE(overlap_report(m, w, h, (1 - r) * b).hidden) << name << " " << v;
      if (r > 1e-3) {
        EXPECT_FALSE(overlap_report(m, w, h, (1 - (r - 1e-3)) * b).hidden) << name << " " << v;
      }
    }
  }
}

TEST(ChunkTail, ServiceTime) {
  HardwareProfile h = hw();
  h.t_dma = 0;
  EXPECT_NEAR(chunk_tail_stall(16e6, h), 0.571e-3, 0.001e-3);
  EXPECT_NEAR(chunk_tail_stall(256e6, h), 9.13e-3, 0.01e-3);
  h.t_dma = 40e-6;
  EXPECT_NEAR(chunk_tail_stall(1e-9, h), 40e-6, 1e-12);
}

TEST(NearestGrid, TiesGoLow) {
  const std::vector<std::int64_t> grid{9, 17, 33, 65};
  EXPECT_EQ(nearest_grid_value(grid, 34.53), 33);
  EXPECT_EQ(nearest_grid_value(grid, 25.0), 17);
  EXPECT_EQ(nearest_grid_value(grid, 1000), 65);
  EXPECT_EQ(nearest_grid_value({}, 3.0), std::nullopt);
}

}  // namespace
}  // namespace offload
