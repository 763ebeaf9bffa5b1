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

#include "offload/overlap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace offload {

double t_comp(double flops, const HardwareProfile& hw) { return flops / hw.compute_roof(); }

double t_pref(double bytes, const HardwareProfile& hw) { return bytes / hw.h2d_roof(); }

double f_star(const HardwareProfile& hw, double b_pref) {
  return hw.eta_comp * hw.p_peak * b_pref / (hw.eta_pref * hw.bw_h2d);
}

double i_star(const HardwareProfile& hw) {
  return hw.eta_comp * hw.p_peak / (hw.eta_pref * hw.bw_h2d);
}

double attainable(const HardwareProfile& hw, double intensity) {
  // Branch on the ridge rather than taking min() of the two arms so the kink
  // lands exactly on the compute roof.
  if (intensity >= i_star(hw)) return hw.compute_roof();
  return intensity * hw.h2d_roof();
}

std::vector<RooflinePoint> roofline_points(const HardwareProfile& hw,
                                           std::span<const double> intensities) {
  std::vector<RooflinePoint> out;
  out.reserve(intensities.size());
  for (double i : intensities) out.push_back({i, attainable(hw, i)});
  return out;
}

OverlapReport overlap_report(const ModelSpec& model, const WorkloadPoint& w,
                             const HardwareProfile& hw, std::optional<double> prefetch_bytes) {
  OverlapReport r;
  r.prefetch_bytes =
      prefetch_bytes.value_or(static_cast<double>(offload::prefetch_bytes(model)));
  r.f_block = flops_block_avg(model, w.batch, w.seq_len);
  r.f_per_gpu = per_gpu_flops(r.f_block, w.sp_degree);
  r.t_comp = t_comp(r.f_per_gpu, hw);
  r.t_pref = t_pref(r.prefetch_bytes, hw);
  r.f_star = f_star(hw, r.prefetch_bytes);
  r.i_star = i_star(hw);
  r.i_block = r.prefetch_bytes > 0 ? r.f_per_gpu / r.prefetch_bytes
                                   : std::numeric_limits<double>::infinity();
  r.hidden = r.t_comp >= r.t_pref;
  r.exposed = std::max(0.0, r.t_pref - r.t_comp);
  return r;
}

CriticalConfig critical_config(const ModelSpec& model, const HardwareProfile& hw,
                               SweepVariable var, const WorkloadPoint& base) {
  const double target = f_star(hw, static_cast<double>(prefetch_bytes(model)));
  const auto per_gpu_at = [&](double x) {
    const double batch = var == SweepVariable::kBatch ? x : static_cast<double>(base.batch);
    const double seq = var == SweepVariable::kFrames
                           ? seq_len_real(model, x)
                           : seq_len_real(model, base.frames ? static_cast<double>(*base.frames)
                                                             : 0.0);
    return per_gpu_flops(flops_block_avg_real(model, batch, seq), base.sp_degree);
  };

  CriticalConfig out;
  out.variable = var;
  double lo = kSweepLowerBound;
  double hi = kSweepUpperBound;
  if (per_gpu_at(lo) >= target) {
    out.status = CrossingStatus::kAlwaysHidden;
    return out;
  }
  if (per_gpu_at(hi) < target) {
    out.status = CrossingStatus::kNeverHidden;
    return out;
  }
  // Invariant: per_gpu_at(lo) < target <= per_gpu_at(hi).
  while ((hi - lo) > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (per_gpu_at(mid) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.value = hi;
  out.rounded_up = static_cast<std::int64_t>(std::ceil(hi));
  return out;
}

CriticalConfig critical_config(const ModelSpec& model, const HardwareProfile& hw) {
  WorkloadPoint base;
  base.batch = 1;
  base.sp_degree = hw.gpu_count;
  return critical_config(model, hw, natural_sweep_variable(model), base);
}

double min_residency(const ModelSpec& model, const WorkloadPoint& w, const HardwareProfile& hw) {
  const double bytes = static_cast<double>(prefetch_bytes(model));
  const double window = t_comp(per_gpu_flops(flops_block_avg(model, w.batch, w.seq_len),
                                             w.sp_degree),
                               hw);
  double r = std::clamp(1.0 - window * hw.h2d_roof() / bytes, 0.0, 1.0);
  // The closed form can land one rounding step short of the condition.
  while (r < 1.0 && t_pref((1.0 - r) * bytes, hw) > window) r = std::nextafter(r, 2.0);
  return r;
}

double chunk_tail_stall(double chunk_bytes, const HardwareProfile& hw) {
  return hw.t_dma + chunk_bytes / hw.h2d_roof();
}

std::optional<std::int64_t> nearest_grid_value(std::span<const std::int64_t> grid, double x) {
  if (grid.empty()) return std::nullopt;
  std::int64_t best = grid.front();
  for (std::int64_t v : grid) {
    if (std::abs(static_cast<double>(v) - x) < std::abs(static_cast<double>(best) - x)) best = v;
  }
  return best;
}

}  // namespace offload
