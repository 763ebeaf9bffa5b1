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
#include <utility>
#include <vector>

#include "offload/config.hpp"
#include "offload/overlap.hpp"
#include "offload/pcie_sim.hpp"

namespace offload {

struct RunOptions {
  bool svg = false;
  // Run validate_trace on every simulated step; throw ValidationError on
  // the first violation.
  bool validate = false;
};

struct LabeledRun {
  std::string label;
  StepBreakdown breakdown;
};

struct CommandOutput {
  std::string csv;
  std::string svg;      // empty unless RunOptions::svg
  std::string summary;  // human-readable report
  std::vector<LabeledRun> runs;
};

// Workload at one point of the model's natural sweep: frames for video
// models, batch for fixed-sequence models; p = hw.gpu_count.
WorkloadPoint workload_at(const ModelSpec& model, const HardwareProfile& hw, std::int64_t value);

struct Prediction {
  std::string model;
  double f_star = 0.0;
  double i_star = 0.0;
  double t_pref = 0.0;
  CriticalConfig critical;
  std::optional<std::int64_t> critical_rounded;  // nearest sweep-grid value
  std::int64_t residency_value = 0;
  double min_residency = 0.0;
};

// `value` selects the workload for min_residency; defaults to the first
// sweep-grid value.
Prediction predict(const Config& config, const std::string& model,
                   std::optional<std::int64_t> value = std::nullopt);

// CSV: model,f_star_flops,i_star_flops_per_byte,t_pref_s,critical_real,critical_rounded
CommandOutput cmd_predict(const Config& config, const std::vector<std::string>& models,
                          std::optional<std::int64_t> value = std::nullopt);

struct SweepSpec {
  std::string model;
  SweepVariable variable = SweepVariable::kFrames;
  std::vector<std::int64_t> values;
  std::vector<std::string> policies{"no_offload", "whole_layer", "chunked"};
  // Chunked runs are expanded over chunk_bytes x residencies.
  std::vector<std::int64_t> chunk_bytes;
  std::vector<double> residencies;
  std::string csv_path;
  std::string svg_path;
};

// Throws ConfigError for empty or non-increasing lists.
void validate(const SweepSpec& spec);

// CSV: model,sweep_var,value,policy,step_time_s,compute_s,collective_s,
//      prefetch_stall_s,contention_stall_s,overhead_s,peak_param_bytes,
//      total_h2d_bytes,chunk_bytes,residency
CommandOutput cmd_sweep(const Config& config, const SweepSpec& spec, const RunOptions& opts = {});

// One row per breakdown category. Always validates the trace first.
CommandOutput cmd_breakdown(const Config& config, const std::string& model, std::int64_t value,
                            const OffloadPolicy& policy, const RunOptions& opts = {});

CommandOutput cmd_chunk_sweep(const Config& config, const std::string& model, std::int64_t value,
                              const std::vector<std::int64_t>& chunk_bytes,
                              const RunOptions& opts = {});

CommandOutput cmd_residency_sweep(const Config& config, const std::string& model,
                                  std::int64_t value, const std::vector<double>& residencies,
                                  const RunOptions& opts = {});

// Roofline arms, the ridge I*, and one I_block marker per value (defaults
// to the model's sweep grid).
CommandOutput cmd_roofline(const Config& config, const std::string& model,
                           const std::vector<std::int64_t>& values = {},
                           const RunOptions& opts = {});

// Fixed-point seconds with picosecond resolution.
std::string format_seconds(double seconds);

}  // namespace offload
