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

#include "offload/calibration.hpp"

#include <cmath>
#include <stdexcept>

#include "offload/errors.hpp"
#include "offload/policy.hpp"

namespace offload {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

HardwareProfile two_gpu_pcie_node() {
  HardwareProfile hw;
  hw.p_peak = 756e12;
  hw.bw_h2d = 31.5e9;
  hw.eta_comp = 0.60;
  hw.eta_pref = 0.89;
  hw.t_dma = 40e-6;
  hw.bw_coll = hw.eta_pref * hw.bw_h2d;
  hw.t_coll_latency = 50e-6;
  hw.t_pause_resume = 10e-6;
  hw.gpu_count = 2;
  return hw;
}

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path, what);
}

}  // namespace

std::string_view sweep_variable_name(SweepVariable var) {
  return var == SweepVariable::kFrames ? "frames" : "batch";
}

SweepVariable parse_sweep_variable(std::string_view name) {
  if (name == "frames") return SweepVariable::kFrames;
  if (name == "batch") return SweepVariable::kBatch;
  throw std::invalid_argument("sweep variable must be 'frames' or 'batch', got '" +
                              std::string(name) + "'");
}

int num_blocks(const BlockArch& arch) {
  return std::visit(Overloaded{[](const DitArch& a) { return a.num_blocks; },
                               [](const MmditArch& a) { return a.n_double + a.n_single; }},
                    arch);
}

SweepVariable natural_sweep_variable(const ModelSpec& model) {
  return std::holds_alternative<AffineSequence>(model.seq) ? SweepVariable::kFrames
                                                           : SweepVariable::kBatch;
}

double derive_b_pref(const ModelSpec& model) {
  const auto* mm = std::get_if<MmditArch>(&model.arch);
  if (mm == nullptr) {
    throw WorkloadError("derive_b_pref: no closed form for DiT blocks; supply a measured b_pref");
  }
  const double d = static_cast<double>(model.d);
  const double f = static_cast<double>(model.f);
  const double per_double = model.beta * (20.0 * d * d + 4.0 * d * f);
  const double per_single = model.beta * (7.0 * d * d + 2.0 * d * f);
  const double blocks = static_cast<double>(mm->n_double + mm->n_single);
  return (mm->n_double * per_double + mm->n_single * per_single) / blocks;
}

std::int64_t prefetch_bytes(const ModelSpec& model) {
  if (model.b_pref) return *model.b_pref;
  return std::llround(derive_b_pref(model));
}

void validate(const HardwareProfile& hw, const std::string& prefix) {
  const auto at = [&](const char* field) { return prefix + "." + field; };
  require(hw.p_peak > 0, at("p_peak"), "p_peak must be > 0");
  require(hw.bw_h2d > 0, at("bw_h2d"), "bw_h2d must be > 0");
  require(hw.eta_comp > 0 && hw.eta_comp <= 1, at("eta_comp"), "eta_comp out of (0,1]");
  require(hw.eta_pref > 0 && hw.eta_pref <= 1, at("eta_pref"), "eta_pref out of (0,1]");
  require(hw.t_dma >= 0, at("t_dma"), "t_dma must be >= 0");
  require(hw.bw_coll > 0, at("bw_coll"), "bw_coll must be > 0");
  require(hw.t_coll_latency >= 0, at("t_coll_latency"), "t_coll_latency must be >= 0");
  require(hw.t_pause_resume >= 0, at("t_pause_resume"), "t_pause_resume must be >= 0");
  require(hw.gpu_count >= 1, at("gpu_count"), "gpu_count must be >= 1");
}

void validate(const ModelSpec& model, const std::string& prefix) {
  const auto at = [&](const char* field) { return prefix + "." + field; };
  require(!model.name.empty(), at("name"), "model name must not be empty");
  require(model.d > 0, at("d"), "d must be > 0");
  require(model.f > 0, at("f"), "f must be > 0");
  require(model.l_ctx > 0, at("l_ctx"), "l_ctx must be > 0");
  require(model.beta > 0, at("beta"), "beta must be > 0");
  require(model.beta_act > 0, at("beta_act"), "beta_act must be > 0");
  require(model.activation_overhead >= 0, at("activation_overhead"),
          "activation_overhead must be >= 0");
  std::visit(Overloaded{[&](const DitArch& a) {
                          require(a.num_blocks >= 1, at("arch.num_blocks"),
                                  "num_blocks must be >= 1");
                        },
                        [&](const MmditArch& a) {
                          require(a.n_double >= 0 && a.n_single >= 0, at("arch"),
                                  "block counts must be >= 0");
                          require(a.n_double + a.n_single >= 1, at("arch"),
                                  "n_double + n_single must be >= 1");
                        }},
             model.arch);
  std::visit(Overloaded{[&](const AffineSequence& s) {
                          // n >= 1 is the smallest admissible frame count.
                          require(s.scale >= 1 && s.scale * (1 + s.offset) >= 1, at("seq"),
                                  "sequence formula yields S < 1 at n = 1");
                        },
                        [&](const FixedSequence& s) {
                          require(s.tokens >= 1, at("seq.tokens"), "tokens must be >= 1");
                        }},
             model.seq);
  if (model.b_pref) {
    require(*model.b_pref > 0, at("b_pref"), "b_pref must be > 0");
  } else {
    require(std::holds_alternative<MmditArch>(model.arch), at("b_pref"),
            "b_pref is required for DiT models");
  }
  for (std::size_t i = 1; i < model.sweep_grid.size(); ++i) {
    require(model.sweep_grid[i] > model.sweep_grid[i - 1], at("sweep_grid"),
            "sweep_grid must be strictly increasing");
  }
  require(model.sweep_grid.empty() || model.sweep_grid.front() >= 1, at("sweep_grid"),
          "sweep_grid values must be >= 1");
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"wanvideo", "flux", "hunyuanvideo"};
  return names;
}

std::pair<HardwareProfile, ModelSpec> preset(std::string_view name) {
  ModelSpec m;
  m.name = std::string(name);
  m.beta = 2.0;
  m.beta_act = 2.0;
  if (name == "wanvideo") {
    m.arch = DitArch{30};
    m.d = 3072;
    m.f = 14336;
    m.l_ctx = 512;
    m.seq = AffineSequence{220, 3};
    m.b_pref = 520 * kMegabyte;
    m.sweep_grid = {41, 81, 121, 161};
  } else if (name == "flux") {
    m.arch = MmditArch{19, 38};
    m.d = 3072;
    m.f = 12288;
    m.l_ctx = 512;
    m.seq = FixedSequence{4096};
    m.b_pref = 465 * kMegabyte;
    m.sweep_grid = {4, 8, 12, 16};
  } else if (name == "hunyuanvideo") {
    m.arch = MmditArch{20, 40};
    m.d = 3072;
    m.f = 12288;
    m.l_ctx = 161;
    m.seq = AffineSequence{900, 3};
    m.b_pref = 675 * kMegabyte;
    m.sweep_grid = {9, 17, 33, 65};
  } else {
    throw UnknownModelError(std::string(name));
  }
  return {two_gpu_pcie_node(), std::move(m)};
}

}  // namespace offload
