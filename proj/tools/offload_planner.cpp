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

// Command-line front end for the offload planner.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "offload/commands.hpp"
#include "offload/config.hpp"
#include "offload/errors.hpp"

namespace fs = std::filesystem;
using namespace offload;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kSimulationError = 3, kValidationError = 4 };

struct Globals {
  std::string config_path;
  std::string out_dir;
  bool svg = false;
  bool validate = false;
  std::string json_trace;
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

void write_traces(const std::string& path, const std::vector<LabeledRun>& runs) {
  std::string text;
  for (const LabeledRun& run : runs) {
    const std::string key = "{\"run\":" + nlohmann::json(run.label).dump() + ",";
    const std::string lines = trace_to_jsonl(run.breakdown);
    std::size_t pos = 0;
    while (pos < lines.size()) {
      const std::size_t nl = lines.find('\n', pos);
      text += key + lines.substr(pos + 1, nl - pos);
      pos = nl + 1;
    }
  }
  write_file(path, text);
}

// CSV to stdout (summary to stderr) unless --out is given, in which case
// files are written there and the summary goes to stdout.
void emit(const Globals& g, const std::string& stem, const CommandOutput& out) {
  if (g.out_dir.empty()) {
    std::cout << out.csv;
    std::cerr << out.summary;
    if (g.svg) write_file(stem + ".svg", out.svg);
  } else {
    const fs::path dir(g.out_dir);
    write_file(dir / (stem + ".csv"), out.csv);
    if (g.svg) write_file(dir / (stem + ".svg"), out.svg);
    std::cout << out.summary;
  }
  if (!g.json_trace.empty()) write_traces(g.json_trace, out.runs);
}

OffloadPolicy make_policy(const Config& config, const std::string& name,
                          std::optional<double> chunk_mb, std::optional<double> residency) {
  Chunked base = std::holds_alternative<Chunked>(config.default_policy)
                     ? std::get<Chunked>(config.default_policy)
                     : Chunked{};
  const std::int64_t c = chunk_mb ? static_cast<std::int64_t>(*chunk_mb * kMegabyte) : base.chunk_bytes;
  try {
    return parse_policy(name, c, residency.value_or(base.residency));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("policy", e.what());
  }
}

std::vector<std::int64_t> to_bytes(const std::vector<double>& mbs) {
  std::vector<std::int64_t> out;
  for (double m : mbs) out.push_back(static_cast<std::int64_t>(m * kMegabyte));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plan and simulate layerwise weight offloading over PCIe."};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON configuration (built-in presets if omitted)");
  app.add_option("--out", g.out_dir, "Directory for CSV/SVG outputs");
  app.add_flag("--svg", g.svg, "Emit SVG charts");
  app.add_flag("--validate", g.validate, "Validate every simulated trace");
  app.add_option("--json-trace", g.json_trace, "Write simulated event traces as JSON lines");

  std::vector<std::string> predict_models;
  std::optional<std::int64_t> predict_value;
  auto* predict = app.add_subcommand("predict", "Analytical overlap predictions");
  predict->add_option("models", predict_models, "Models (default: all in config)");
  predict->add_option("--value", predict_value, "Workload value for min_residency");

  SweepSpec sweep;
  std::string sweep_var;
  std::vector<double> sweep_chunks;
  auto* sweep_cmd = app.add_subcommand("sweep", "Step time and memory across a workload grid");
  sweep_cmd->add_option("model", sweep.model)->required();
  sweep_cmd->add_option("--var", sweep_var, "frames | batch (default: model's natural variable)");
  sweep_cmd->add_option("--values", sweep.values, "Workload values (default: preset grid)");
  sweep_cmd->add_option("--policies", sweep.policies, "Policies to run");
  sweep_cmd->add_option("--chunk-mb", sweep_chunks, "Chunk sizes in MB for chunked runs");
  sweep_cmd->add_option("--residency", sweep.residencies, "Resident fractions for chunked runs");

  std::string bd_model;
  std::int64_t bd_value = 0;
  std::string bd_policy = "chunked";
  std::optional<double> bd_chunk;
  std::optional<double> bd_residency;
  auto* breakdown = app.add_subcommand("breakdown", "Per-category latency decomposition");
  breakdown->add_option("model", bd_model)->required();
  breakdown->add_option("value", bd_value)->required();
  breakdown->add_option("--policy", bd_policy, "no_offload | whole_layer | chunked");
  breakdown->add_option("--chunk-mb", bd_chunk, "Chunk size in MB");
  breakdown->add_option("--residency", bd_residency, "Resident fraction");

  std::string cs_model;
  std::int64_t cs_value = 0;
  std::vector<double> cs_chunks{4, 16, 64, 256};
  auto* chunk_sweep = app.add_subcommand("chunk-sweep", "Step time versus chunk size");
  chunk_sweep->add_option("model", cs_model)->required();
  chunk_sweep->add_option("value", cs_value)->required();
  chunk_sweep->add_option("--chunk-mb", cs_chunks, "Chunk sizes in MB");

  std::string rs_model;
  std::int64_t rs_value = 0;
  std::vector<double> rs_residencies{0.0, 0.2, 0.4, 0.6, 1.0};
  auto* residency_sweep = app.add_subcommand("residency-sweep", "Step time and memory versus residency");
  residency_sweep->add_option("model", rs_model)->required();
  residency_sweep->add_option("value", rs_value)->required();
  residency_sweep->add_option("--residency", rs_residencies, "Resident fractions");

  std::string rl_model;
  std::vector<std::int64_t> rl_values;
  auto* roofline = app.add_subcommand("roofline", "Roofline with the H2D roof and block markers");
  roofline->add_option("model", rl_model)->required();
  roofline->add_option("--values", rl_values, "Workload values (default: preset grid)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    const Config config = g.config_path.empty() ? builtin_config() : load_config_file(g.config_path);
    const RunOptions opts{g.svg, g.validate};

    if (*predict) {
      if (predict_models.empty()) {
        for (const ModelSpec& m : config.models) predict_models.push_back(m.name);
      }
      emit(g, "predict", cmd_predict(config, predict_models, predict_value));
    } else if (*sweep_cmd) {
      const ModelSpec& model = config.model(sweep.model);
      sweep.variable = sweep_var.empty() ? natural_sweep_variable(model) : parse_sweep_variable(sweep_var);
      if (sweep.values.empty()) sweep.values = model.sweep_grid;
      sweep.chunk_bytes = to_bytes(sweep_chunks);
      emit(g, "sweep_" + sweep.model, cmd_sweep(config, sweep, opts));
    } else if (*breakdown) {
      const OffloadPolicy policy = make_policy(config, bd_policy, bd_chunk, bd_residency);
      emit(g, "breakdown_" + bd_model + "_" + std::to_string(bd_value),
           cmd_breakdown(config, bd_model, bd_value, policy, opts));
    } else if (*chunk_sweep) {
      emit(g, "chunk_sweep_" + cs_model + "_" + std::to_string(cs_value),
           cmd_chunk_sweep(config, cs_model, cs_value, to_bytes(cs_chunks), opts));
    } else if (*residency_sweep) {
      emit(g, "residency_sweep_" + rs_model + "_" + std::to_string(rs_value),
           cmd_residency_sweep(config, rs_model, rs_value, rs_residencies, opts));
    } else if (*roofline) {
      emit(g, "roofline_" + rl_model, cmd_roofline(config, rl_model, rl_values, opts));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kValidationError;
  } catch (const SimulationError& e) {
    std::cerr << "simulation error: " << e.what() << "\n";
    return kSimulationError;
  } catch (const WorkloadError& e) {
    std::cerr << "workload error: " << e.what() << "\n";
    return kSimulationError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kOk;
}
