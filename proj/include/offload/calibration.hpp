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
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace offload {

/// Platform constants and calibration factors for one class of GPU.
///
/// Rates are SI (FLOP/s, B/s) and latencies are seconds. `bw_h2d` is the
/// per-GPU host-to-device bandwidth after any sharing of the host root port.
struct HardwareProfile {
  double p_peak = 0.0;
  double bw_h2d = 0.0;
  double eta_comp = 1.0;
  double eta_pref = 1.0;
  double t_dma = 40e-6;
  double bw_coll = 0.0;
  double t_coll_latency = 50e-6;
  double t_pause_resume = 10e-6;
  int gpu_count = 1;

  double compute_roof() const { return eta_comp * p_peak; }
  double h2d_roof() const { return eta_pref * bw_h2d; }

  friend bool operator==(const HardwareProfile&, const HardwareProfile&) = default;
};

struct DitArch {
  int num_blocks = 0;
  friend bool operator==(const DitArch&, const DitArch&) = default;
};

struct MmditArch {
  int n_double = 0;
  int n_single = 0;
  friend bool operator==(const MmditArch&, const MmditArch&) = default;
};

using BlockArch = std::variant<DitArch, MmditArch>;

// S = scale * (n + offset) for a frame count n.
struct AffineSequence {
  std::int64_t scale = 1;
  std::int64_t offset = 0;
  friend bool operator==(const AffineSequence&, const AffineSequence&) = default;
};

struct FixedSequence {
  std::int64_t tokens = 1;
  friend bool operator==(const FixedSequence&, const FixedSequence&) = default;
};

using SequenceFormula = std::variant<AffineSequence, FixedSequence>;

enum class SweepVariable { kFrames, kBatch };

std::string_view sweep_variable_name(SweepVariable var);
SweepVariable parse_sweep_variable(std::string_view name);

struct ModelSpec {
  std::string name;
  BlockArch arch;
  std::int64_t d = 0;
  std::int64_t f = 0;
  std::int64_t l_ctx = 0;
  double beta = 2.0;
  double beta_act = 2.0;
  // Measured per-block prefetch volume. Unset means derive_b_pref().
  std::optional<std::int64_t> b_pref;
  SequenceFormula seq;
  std::int64_t activation_overhead = 0;
  // Configurations the sweeps visit; predictions round to the nearest one.
  std::vector<std::int64_t> sweep_grid;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

int num_blocks(const BlockArch& arch);

// Frames for video models (affine sequence), batch for fixed-sequence ones.
SweepVariable natural_sweep_variable(const ModelSpec& model);

/// Block-averaged prefetch volume in bytes for an MM-DiT model, from the
/// per-block parameter counts of double-stream (20d^2 + 4df) and
/// single-stream (7d^2 + 2df) blocks. Throws WorkloadError for DiT.
double derive_b_pref(const ModelSpec& model);

// Measured b_pref when present, otherwise derive_b_pref rounded to bytes.
std::int64_t prefetch_bytes(const ModelSpec& model);

// Throw ConfigError naming `prefix.<field>` on the first invariant violation.
void validate(const HardwareProfile& hw, const std::string& prefix = "hardware");
void validate(const ModelSpec& model, const std::string& prefix = "model");

// Built-in platform and model constants. Names: wanvideo, flux, hunyuanvideo.
std::pair<HardwareProfile, ModelSpec> preset(std::string_view name);
const std::vector<std::string>& preset_names();

}  // namespace offload
