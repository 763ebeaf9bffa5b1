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

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "offload/calibration.hpp"
#include "offload/workload.hpp"

namespace offload {

// Block compute time for per-GPU FLOPs at the calibrated compute roof.
double t_comp(double flops, const HardwareProfile& hw);

// First-order prefetch time for `bytes` at the calibrated H2D roof.
double t_pref(double bytes, const HardwareProfile& hw);

// Critical compute workload: the per-GPU block FLOPs whose compute window
// equals the prefetch time of `b_pref` bytes.
double f_star(const HardwareProfile& hw, double b_pref);

// Roofline ridge between the compute roof and the H2D bandwidth roof.
double i_star(const HardwareProfile& hw);

struct RooflinePoint {
  double intensity = 0.0;   // FLOP/byte
  double attainable = 0.0;  // FLOP/s
};

double attainable(const HardwareProfile& hw, double intensity);
std::vector<RooflinePoint> roofline_points(const HardwareProfile& hw,
                                           std::span<const double> intensities);

struct OverlapReport {
  double f_block = 0.0;    // global, block-averaged
  double f_per_gpu = 0.0;
  double prefetch_bytes = 0.0;
  double t_comp = 0.0;
  double t_pref = 0.0;
  double f_star = 0.0;
  double i_block = 0.0;    // per-GPU FLOPs per prefetched byte
  double i_star = 0.0;
  bool hidden = false;
  double exposed = 0.0;    // max(0, t_pref - t_comp)
};

// `prefetch_bytes` defaults to the model's b_pref.
OverlapReport overlap_report(const ModelSpec& model, const WorkloadPoint& w,
                             const HardwareProfile& hw,
                             std::optional<double> prefetch_bytes = std::nullopt);

enum class CrossingStatus { kCrossing, kAlwaysHidden, kNeverHidden };

struct CriticalConfig {
  CrossingStatus status = CrossingStatus::kCrossing;
  SweepVariable variable = SweepVariable::kFrames;
  double value = 0.0;           // real-valued threshold (kCrossing only)
  std::int64_t rounded_up = 0;  // smallest admissible integer at or above it
};

inline constexpr double kSweepLowerBound = 1.0;
inline constexpr double kSweepUpperBound = 1e6;

/// Smallest x in [1, 1e6] with per-GPU F_block(x) >= F*, by bracketing and
/// bisection to relative tolerance 1e-6. `base` supplies the variables that
/// are not swept (batch for a frame sweep, frames for a batch sweep) and the
/// parallel degree.
CriticalConfig critical_config(const ModelSpec& model, const HardwareProfile& hw,
                               SweepVariable var, const WorkloadPoint& base);

// Convenience overload: natural sweep variable, batch 1, p = hw.gpu_count.
CriticalConfig critical_config(const ModelSpec& model, const HardwareProfile& hw);

// Smallest resident fraction r in [0,1] with
// t_pref((1 - r) * b_pref) <= t_comp(per-GPU F_block).
double min_residency(const ModelSpec& model, const WorkloadPoint& w, const HardwareProfile& hw);

// Service time of one chunk: the longest a collective can queue behind the
// chunked prefetch.
double chunk_tail_stall(double chunk_bytes, const HardwareProfile& hw);

// Nearest grid value; ties go to the smaller value. Empty grid returns
// nullopt.
std::optional<std::int64_t> nearest_grid_value(std::span<const std::int64_t> grid, double x);

}  // namespace offload
