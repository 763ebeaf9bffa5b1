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

#include "offload/commands.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "offload/errors.hpp"
#include "offload/svg.hpp"

namespace offload {

namespace {

constexpr const char* kSweepHeader =
    "model,sweep_var,value,policy,step_time_s,compute_s,collective_s,prefetch_stall_s,"
    "contention_stall_s,overhead_s,peak_param_bytes,total_h2d_bytes,chunk_bytes,residency\n";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt_seconds(SimDuration d) {
  const std::int64_t ps = d.count();
  char buf[48];
  std::snprintf(buf, sizeof buf, "%" PRId64 ".%012" PRId64, ps / 1'000'000'000'000,
                ps % 1'000'000'000'000);
  return buf;
}

std::string mb(std::int64_t bytes) {
  return fmt(static_cast<double>(bytes) / kMegabyte) + "MB";
}

std::string policy_label(const OffloadPolicy& policy) {
  if (const auto* c = std::get_if<Chunked>(&policy)) {
    return "chunked " + mb(c->chunk_bytes) + " r=" + fmt(c->residency);
  }
  return std::string(policy_name(policy));
}

void check(const StepBreakdown& b, const std::string& label, const RunOptions& opts) {
  if (!opts.validate) return;
  const auto violations = validate_trace(b);
  if (violations.empty()) return;
  std::string msg = "trace validation failed for " + label + ":";
  for (const auto& v : violations) msg += "\n  " + v;
  throw ValidationError(msg);
}

std::string breakdown_columns(const StepBreakdown& b) {
  return fmt_seconds(b.step_time) + "," + fmt_seconds(b.compute) + "," +
         fmt_seconds(b.collective) + "," + fmt_seconds(b.prefetch_stall) + "," +
         fmt_seconds(b.contention_stall) + "," + fmt_seconds(b.overhead) + "," +
         std::to_string(b.peak_param_bytes) + "," + std::to_string(b.total_h2d_bytes);
}

std::string sweep_row(const ModelSpec& model, SweepVariable var, std::int64_t value,
                      const OffloadPolicy& policy, const StepBreakdown& b) {
  const auto* c = std::get_if<Chunked>(&policy);
  return model.name + "," + std::string(sweep_variable_name(var)) + "," + std::to_string(value) +
         "," + std::string(policy_name(policy)) + "," + breakdown_columns(b) + "," +
         std::to_string(c ? c->chunk_bytes : 0) + "," + fmt(c ? c->residency : 0.0) + "\n";
}

std::string run_label(const ModelSpec& model, std::int64_t value, const OffloadPolicy& policy) {
  return model.name + "/" + std::to_string(value) + "/" + policy_label(policy);
}

template <class T>
void require_increasing(const std::vector<T>& v, const std::string& path) {
  if (v.empty()) throw ConfigError(path, "list must not be empty");
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) throw ConfigError(path, "list must be strictly increasing");
  }
}

Chunked default_chunked(const Config& config) {
  if (const auto* c = std::get_if<Chunked>(&config.default_policy)) return *c;
  return Chunked{};
}

}  // namespace

std::string format_seconds(double seconds) { return fmt_seconds(from_seconds(seconds)); }

WorkloadPoint workload_at(const ModelSpec& model, const HardwareProfile& hw, std::int64_t value) {
  return sweep_point(model, natural_sweep_variable(model), value, hw.gpu_count);
}

Prediction predict(const Config& config, const std::string& name,
                   std::optional<std::int64_t> value) {
  const ModelSpec& model = config.model(name);
  const HardwareProfile& hw = config.hardware;
  const double bytes = static_cast<double>(prefetch_bytes(model));
  Prediction p;
  p.model = model.name;
  p.f_star = f_star(hw, bytes);
  p.i_star = i_star(hw);
  p.t_pref = t_pref(bytes, hw);
  p.critical = critical_config(model, hw);
  if (p.critical.status == CrossingStatus::kCrossing) {
    p.critical_rounded = model.sweep_grid.empty()
                             ? std::optional<std::int64_t>(p.critical.rounded_up)
                             : nearest_grid_value(model.sweep_grid, p.critical.value);
  }
  if (!value && model.sweep_grid.empty()) {
    throw ConfigError("models." + model.name + ".sweep_grid",
                      "no sweep grid; pass an explicit workload value");
  }
  p.residency_value = value.value_or(model.sweep_grid.front());
  p.min_residency = min_residency(model, workload_at(model, hw, p.residency_value), hw);
  return p;
}

CommandOutput cmd_predict(const Config& config, const std::vector<std::string>& models,
                          std::optional<std::int64_t> value) {
  CommandOutput out;
  out.csv = "model,f_star_flops,i_star_flops_per_byte,t_pref_s,critical_real,critical_rounded\n";
  std::ostringstream summary;
  for (const std::string& name : models) {
    const Prediction p = predict(config, name, value);
    const ModelSpec& model = config.model(name);
    const std::string var(sweep_variable_name(p.critical.variable));
    std::string real;
    std::string rounded;
    switch (p.critical.status) {
      case CrossingStatus::kCrossing:
        real = fmt(p.critical.value);
        rounded = std::to_string(*p.critical_rounded);
        break;
      case CrossingStatus::kAlwaysHidden:
        real = "always_hidden";
        break;
      case CrossingStatus::kNeverHidden:
        real = "never_hidden";
        break;
    }
    out.csv += p.model + "," + fmt(p.f_star) + "," + fmt(p.i_star) + "," + fmt_seconds(from_seconds(p.t_pref)) +
               "," + real + "," + rounded + "\n";
    summary << p.model << ": F* = " << fmt(p.f_star) << " FLOP, I* = " << fmt(p.i_star)
            << " FLOP/B, T_pref = " << fmt(p.t_pref * 1e3) << " ms\n"
            << "  critical " << var << " = " << real;
    if (p.critical.status == CrossingStatus::kCrossing) {
      summary << " (admissible " << p.critical.rounded_up << ", nearest swept " << rounded << ")";
    }
    summary << "\n  min residency at " << var << " " << p.residency_value << " = "
            << fmt(p.min_residency) << " (b_pref " << mb(prefetch_bytes(model)) << ")\n";
  }
  out.summary = summary.str();
  return out;
}

void validate(const SweepSpec& spec) {
  require_increasing(spec.values, "sweep.values");
  if (spec.policies.empty()) throw ConfigError("sweep.policies", "list must not be empty");
  if (!spec.chunk_bytes.empty()) require_increasing(spec.chunk_bytes, "sweep.chunk_bytes");
  if (!spec.residencies.empty()) require_increasing(spec.residencies, "sweep.residencies");
}

CommandOutput cmd_sweep(const Config& config, const SweepSpec& spec, const RunOptions& opts) {
  validate(spec);
  const ModelSpec& model = config.model(spec.model);
  const HardwareProfile& hw = config.hardware;
  const Chunked fallback = default_chunked(config);
  const std::vector<std::int64_t> chunks =
      spec.chunk_bytes.empty() ? std::vector<std::int64_t>{fallback.chunk_bytes} : spec.chunk_bytes;
  const std::vector<double> residencies =
      spec.residencies.empty() ? std::vector<double>{fallback.residency} : spec.residencies;

  SweepGrid grid;
  grid.variable = spec.variable;
  grid.values = spec.values;
  grid.sp_degree = hw.gpu_count;
  if (spec.variable != natural_sweep_variable(model)) {
    throw WorkloadError("model '" + model.name + "' sweeps " +
                        std::string(sweep_variable_name(natural_sweep_variable(model))));
  }
  for (const std::string& name : spec.policies) {
    OffloadPolicy kind;
    try {
      kind = parse_policy(name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("sweep.policies", e.what());
    }
    if (!std::holds_alternative<Chunked>(kind)) {
      grid.policies.push_back(kind);
      continue;
    }
    for (std::int64_t c : chunks) {
      for (double r : residencies) grid.policies.push_back(Chunked{c, r});
    }
  }

  const std::vector<SweepRow> rows = simulate_sweep(model, hw, grid, config.schedule);
  CommandOutput out;
  out.csv = kSweepHeader;
  for (const SweepRow& row : rows) {
    const std::string label = run_label(model, row.value, row.policy);
    check(row.breakdown, label, opts);
    out.csv += sweep_row(model, spec.variable, row.value, row.policy, row.breakdown);
    out.runs.push_back({label, row.breakdown});
  }
  out.summary = std::to_string(rows.size()) + " rows for " + model.name + "\n";

  if (opts.svg) {
    std::vector<svg::Series> time_series;
    std::vector<svg::Series> mem_series;
    for (std::size_t p = 0; p < grid.policies.size(); ++p) {
      svg::Series t{policy_label(grid.policies[p]), {}};
      svg::Series m{policy_label(grid.policies[p]), {}};
      for (std::size_t v = 0; v < grid.values.size(); ++v) {
        const StepBreakdown& b = rows[v * grid.policies.size() + p].breakdown;
        const double x = static_cast<double>(grid.values[v]);
        t.points.emplace_back(x, b.step_time_s());
        m.points.emplace_back(x, static_cast<double>(b.peak_param_bytes) / 1e9);
      }
      time_series.push_back(std::move(t));
      mem_series.push_back(std::move(m));
    }
    const std::string var(sweep_variable_name(spec.variable));
    out.svg = svg::line_chart(model.name + ": step time and peak parameter memory",
                              {{"Denoising step time", {var}, {"seconds"}, time_series, {}},
                               {"Peak parameter memory", {var}, {"GB"}, mem_series, {}}});
  }
  return out;
}

CommandOutput cmd_breakdown(const Config& config, const std::string& name, std::int64_t value,
                            const OffloadPolicy& policy, const RunOptions& opts) {
  const ModelSpec& model = config.model(name);
  const HardwareProfile& hw = config.hardware;
  const WorkloadPoint w = workload_at(model, hw, value);
  const StepBreakdown b = simulate_step(model, w, hw, policy, config.schedule);
  const std::string label = run_label(model, value, policy);
  RunOptions strict = opts;
  strict.validate = true;
  check(b, label, strict);

  const std::pair<const char*, SimDuration> categories[] = {
      {"compute", b.compute},
      {"collective", b.collective},
      {"prefetch_stall", b.prefetch_stall},
      {"contention_stall", b.contention_stall},
      {"overhead", b.overhead}};
  const std::string var(sweep_variable_name(natural_sweep_variable(model)));
  CommandOutput out;
  out.csv = "model,sweep_var,value,policy,category,seconds,fraction\n";
  std::ostringstream summary;
  summary << label << ": step " << fmt_seconds(b.step_time) << " s\n";
  for (const auto& [cat, d] : categories) {
    const double frac = to_seconds(d) / b.step_time_s();
    out.csv += model.name + "," + var + "," + std::to_string(value) + "," +
               std::string(policy_name(policy)) + "," + cat + "," + fmt_seconds(d) + "," +
               fmt(frac) + "\n";
    summary << "  " << cat << " " << fmt_seconds(d) << " s (" << fmt(100.0 * frac) << "%)\n";
  }
  out.summary = summary.str();
  out.runs.push_back({label, b});

  if (opts.svg) {
    const StepBreakdown whole = simulate_step(model, w, hw, WholeLayer{}, config.schedule);
    svg::BarStack bar{var + "=" + std::to_string(value), {}, whole.step_time_s()};
    std::vector<std::string> names;
    for (const auto& [cat, d] : categories) {
      names.emplace_back(cat);
      bar.values.push_back(to_seconds(d));
    }
    out.svg = svg::stacked_bars(model.name + ": per-step latency decomposition (" +
                                    policy_label(policy) + ")",
                                "seconds", names, {bar}, "whole_layer step time");
  }
  return out;
}

CommandOutput cmd_chunk_sweep(const Config& config, const std::string& name, std::int64_t value,
                              const std::vector<std::int64_t>& chunk_bytes,
                              const RunOptions& opts) {
  require_increasing(chunk_bytes, "chunk_sweep.chunk_bytes");
  const ModelSpec& model = config.model(name);
  const HardwareProfile& hw = config.hardware;
  const double residency = default_chunked(config).residency;

  SweepGrid grid;
  grid.variable = natural_sweep_variable(model);
  grid.values = {value};
  grid.sp_degree = hw.gpu_count;
  grid.policies = {NoOffload{}, WholeLayer{}};
  for (std::int64_t c : chunk_bytes) grid.policies.push_back(Chunked{c, residency});
  const std::vector<SweepRow> rows = simulate_sweep(model, hw, grid, config.schedule);

  CommandOutput out;
  out.csv =
      "model,value,chunk_bytes,n_chunks,step_time_s,compute_s,collective_s,prefetch_stall_s,"
      "contention_stall_s,overhead_s,peak_param_bytes,total_h2d_bytes,chunk_tail_stall_s\n";
  svg::Series chunked{"chunked", {}};
  for (const SweepRow& row : rows) {
    const std::string label = run_label(model, value, row.policy);
    check(row.breakdown, label, opts);
    out.runs.push_back({label, row.breakdown});
    const auto* c = std::get_if<Chunked>(&row.policy);
    if (c == nullptr) continue;
    const StepBreakdown& b = row.breakdown;
    out.csv += model.name + "," + std::to_string(value) + "," + std::to_string(c->chunk_bytes) +
               "," + std::to_string(b.layout.n_chunks) + "," + breakdown_columns(b) + "," +
               fmt_seconds(from_seconds(chunk_tail_stall(
                   static_cast<double>(std::min(c->chunk_bytes, b.layout.layer_bytes)), hw))) +
               "\n";
    chunked.points.emplace_back(static_cast<double>(c->chunk_bytes) / kMegabyte,
                                b.step_time_s());
  }
  const auto best = std::min_element(rows.begin() + 2, rows.end(), [](const auto& a, const auto& b) {
    return a.breakdown.step_time < b.breakdown.step_time;
  });
  out.summary = model.name + " at " + std::to_string(value) + ": fastest chunk size " +
                mb(std::get<Chunked>(best->policy).chunk_bytes) + " (" +
                fmt_seconds(best->breakdown.step_time) + " s; no_offload " +
                fmt_seconds(rows[0].breakdown.step_time) + " s, whole_layer " +
                fmt_seconds(rows[1].breakdown.step_time) + " s)\n";

  if (opts.svg) {
    const double lo = chunked.points.front().first;
    const double hi = chunked.points.back().first;
    svg::Series none{"no_offload", {{lo, rows[0].breakdown.step_time_s()},
                                    {hi, rows[0].breakdown.step_time_s()}}, true, true, false};
    svg::Series whole{"whole_layer", {{lo, rows[1].breakdown.step_time_s()},
                                      {hi, rows[1].breakdown.step_time_s()}}, true, true, false};
    out.svg = svg::line_chart(
        model.name + ": step time vs chunk size",
        {{"", {"chunk size (MB)", true}, {"step time (s)"}, {chunked, none, whole}, {}}});
  }
  return out;
}

CommandOutput cmd_residency_sweep(const Config& config, const std::string& name,
                                  std::int64_t value, const std::vector<double>& residencies,
                                  const RunOptions& opts) {
  require_increasing(residencies, "residency_sweep.residencies");
  const ModelSpec& model = config.model(name);
  const HardwareProfile& hw = config.hardware;
  const std::int64_t chunk = default_chunked(config).chunk_bytes;

  SweepGrid grid;
  grid.variable = natural_sweep_variable(model);
  grid.values = {value};
  grid.sp_degree = hw.gpu_count;
  grid.policies = {NoOffload{}};
  for (double r : residencies) grid.policies.push_back(Chunked{chunk, r});
  const std::vector<SweepRow> rows = simulate_sweep(model, hw, grid, config.schedule);

  CommandOutput out;
  out.csv =
      "model,value,residency,effective_residency,chunk_bytes,step_time_s,compute_s,collective_s,"
      "prefetch_stall_s,contention_stall_s,overhead_s,peak_param_bytes,total_h2d_bytes\n";
  svg::Series time{"chunked", {}};
  svg::Series memory{"chunked", {}};
  for (const SweepRow& row : rows) {
    const std::string label = run_label(model, value, row.policy);
    check(row.breakdown, label, opts);
    out.runs.push_back({label, row.breakdown});
    const auto* c = std::get_if<Chunked>(&row.policy);
    if (c == nullptr) continue;
    const StepBreakdown& b = row.breakdown;
    out.csv += model.name + "," + std::to_string(value) + "," + fmt(c->residency) + "," +
               fmt(b.layout.effective_residency()) + "," + std::to_string(c->chunk_bytes) + "," +
               breakdown_columns(b) + "\n";
    time.points.emplace_back(c->residency, b.step_time_s());
    memory.points.emplace_back(c->residency, static_cast<double>(b.peak_param_bytes) / 1e9);
  }
  const double need =
      min_residency(model, workload_at(model, hw, value), hw);
  out.summary = model.name + " at " + std::to_string(value) +
                ": first-order minimum residency for full overlap " + fmt(need) + "\n";

  if (opts.svg) {
    const StepBreakdown& none = rows.front().breakdown;
    const double lo = residencies.front();
    const double hi = residencies.back();
    svg::Series none_t{"no_offload", {{lo, none.step_time_s()}, {hi, none.step_time_s()}}, true, true, false};
    const double none_gb = static_cast<double>(none.peak_param_bytes) / 1e9;
    svg::Series none_m{"no_offload", {{lo, none_gb}, {hi, none_gb}}, true, true, false};
    out.svg = svg::line_chart(model.name + ": residency trade-off",
                              {{"Step time", {"resident fraction"}, {"seconds"}, {time, none_t}, {}},
                               {"Peak parameter memory", {"resident fraction"}, {"GB"},
                                {memory, none_m}, {}}});
  }
  return out;
}

CommandOutput cmd_roofline(const Config& config, const std::string& name,
                           const std::vector<std::int64_t>& values, const RunOptions& opts) {
  const ModelSpec& model = config.model(name);
  const HardwareProfile& hw = config.hardware;
  const std::vector<std::int64_t>& grid = values.empty() ? model.sweep_grid : values;
  const double ridge = i_star(hw);
  const double bytes = static_cast<double>(prefetch_bytes(model));
  const std::string var(sweep_variable_name(natural_sweep_variable(model)));

  CommandOutput out;
  out.csv = "model,kind,sweep_var,value,intensity_flops_per_byte,attainable_flops_per_s,hidden\n";
  // Both arms over two decades either side of the ridge.
  std::vector<double> arm;
  for (int e = -8; e <= 8; ++e) arm.push_back(ridge * std::pow(10.0, e / 4.0));
  svg::Series roof{"roof", {}};
  roof.draw_points = false;
  for (const RooflinePoint& p : roofline_points(hw, arm)) {
    out.csv += model.name + ",roof,,," + fmt(p.intensity) + "," + fmt(p.attainable) + ",\n";
    roof.points.emplace_back(p.intensity, p.attainable);
  }
  out.csv += model.name + ",ridge,,," + fmt(ridge) + "," + fmt(attainable(hw, ridge)) + ",\n";
  svg::Series markers{"I_block", {}};
  markers.draw_line = false;
  std::ostringstream summary;
  summary << model.name << ": I* = " << fmt(ridge) << " FLOP/B\n";
  for (std::int64_t v : grid) {
    const OverlapReport r = overlap_report(model, workload_at(model, hw, v), hw, bytes);
    out.csv += model.name + ",marker," + var + "," + std::to_string(v) + "," + fmt(r.i_block) +
               "," + fmt(attainable(hw, r.i_block)) + "," + (r.hidden ? "1" : "0") + "\n";
    markers.points.emplace_back(r.i_block, attainable(hw, r.i_block));
    summary << "  " << var << " " << v << ": I_block = " << fmt(r.i_block) << " ("
            << (r.hidden ? "right of" : "left of") << " I*)\n";
  }
  out.summary = summary.str();
  if (opts.svg) {
    svg::Panel panel{"", {"operational intensity (FLOP/byte)", true},
                     {"attainable FLOP/s", true}, {roof, markers}, {{ridge, "I*"}}};
    out.svg = svg::line_chart(model.name + ": roofline with H2D roof", {panel});
  }
  return out;
}

}  // namespace offload
