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

#include "offload/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "offload/errors.hpp"

namespace offload {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& path) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError(path + "." + key, "unknown key");
  }
}

const json& require_object(const json& parent, const std::string& key, const std::string& path) {
  const auto it = parent.find(key);
  if (it == parent.end()) throw ConfigError(path, "missing required field");
  if (!it->is_object()) throw ConfigError(path, "expected an object");
  return *it;
}

double read_double(const json& obj, const std::string& key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

std::int64_t read_int(const json& obj, const std::string& key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<std::int64_t>();
}

bool read_bool(const json& obj, const std::string& key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(path, "expected a boolean");
  return v.get<bool>();
}

std::string read_string(const json& obj, const std::string& key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

// Assigns obj[key] to `out` when present; `required` fields must exist.
template <class T, class Reader>
void field(const json& obj, const std::string& key, const std::string& path, T& out,
           Reader read, bool required = false) {
  const std::string at = path + "." + key;
  if (!obj.contains(key)) {
    if (required) throw ConfigError(at, "missing required field");
    return;
  }
  out = static_cast<T>(read(obj, key, at));
}

HardwareProfile parse_hardware(const json& node) {
  const std::string path = "hardware";
  reject_unknown_keys(node,
                      {"preset", "p_peak", "bw_h2d", "eta_comp", "eta_pref", "t_dma", "bw_coll",
                       "t_coll_latency", "t_pause_resume", "gpu_count"},
                      path);
  HardwareProfile hw;
  const bool from_preset = node.contains("preset");
  if (from_preset) {
    const std::string name = read_string(node, "preset", path + ".preset");
    try {
      hw = preset(name).first;
    } catch (const UnknownModelError&) {
      throw ConfigError(path + ".preset", "unknown preset '" + name + "'");
    }
  }
  const bool required = !from_preset;
  field(node, "p_peak", path, hw.p_peak, read_double, required);
  field(node, "bw_h2d", path, hw.bw_h2d, read_double, required);
  field(node, "eta_comp", path, hw.eta_comp, read_double, required);
  field(node, "eta_pref", path, hw.eta_pref, read_double, required);
  field(node, "t_dma", path, hw.t_dma, read_double);
  field(node, "t_coll_latency", path, hw.t_coll_latency, read_double);
  field(node, "t_pause_resume", path, hw.t_pause_resume, read_double);
  field(node, "gpu_count", path, hw.gpu_count, read_int);
  if (!from_preset) hw.bw_coll = hw.eta_pref * hw.bw_h2d;
  field(node, "bw_coll", path, hw.bw_coll, read_double);
  validate(hw, path);
  return hw;
}

BlockArch parse_arch(const json& node, const std::string& path) {
  if (!node.is_object()) throw ConfigError(path, "expected an object");
  const std::string type = node.contains("type") ? read_string(node, "type", path + ".type") : "";
  if (type == "dit") {
    reject_unknown_keys(node, {"type", "num_blocks"}, path);
    DitArch a;
    field(node, "num_blocks", path, a.num_blocks, read_int, true);
    return a;
  }
  if (type == "mmdit") {
    reject_unknown_keys(node, {"type", "n_double", "n_single"}, path);
    MmditArch a;
    field(node, "n_double", path, a.n_double, read_int, true);
    field(node, "n_single", path, a.n_single, read_int, true);
    return a;
  }
  throw ConfigError(path + ".type", "expected 'dit' or 'mmdit'");
}

SequenceFormula parse_seq(const json& node, const std::string& path) {
  if (!node.is_object()) throw ConfigError(path, "expected an object");
  const std::string type = node.contains("type") ? read_string(node, "type", path + ".type") : "";
  if (type == "affine") {
    reject_unknown_keys(node, {"type", "scale", "offset"}, path);
    AffineSequence s;
    field(node, "scale", path, s.scale, read_int, true);
    field(node, "offset", path, s.offset, read_int);
    return s;
  }
  if (type == "fixed") {
    reject_unknown_keys(node, {"type", "tokens"}, path);
    FixedSequence s;
    field(node, "tokens", path, s.tokens, read_int, true);
    return s;
  }
  throw ConfigError(path + ".type", "expected 'affine' or 'fixed'");
}

ModelSpec parse_model(const json& node, const std::string& path) {
  if (!node.is_object()) throw ConfigError(path, "expected an object");
  reject_unknown_keys(node,
                      {"preset", "name", "arch", "d", "f", "l_ctx", "beta", "beta_act", "b_pref",
                       "seq", "activation_overhead", "sweep_grid"},
                      path);
  ModelSpec m;
  const bool from_preset = node.contains("preset");
  if (from_preset) {
    const std::string name = read_string(node, "preset", path + ".preset");
    try {
      m = preset(name).second;
    } catch (const UnknownModelError&) {
      throw ConfigError(path + ".preset", "unknown preset '" + name + "'");
    }
  }
  const bool required = !from_preset;
  field(node, "name", path, m.name, read_string, required);
  if (node.contains("arch")) {
    m.arch = parse_arch(node.at("arch"), path + ".arch");
  } else if (required) {
    throw ConfigError(path + ".arch", "missing required field");
  }
  field(node, "d", path, m.d, read_int, required);
  field(node, "f", path, m.f, read_int, required);
  field(node, "l_ctx", path, m.l_ctx, read_int, required);
  field(node, "beta", path, m.beta, read_double);
  field(node, "beta_act", path, m.beta_act, read_double);
  if (node.contains("b_pref")) {
    if (node.at("b_pref").is_null()) {
      m.b_pref.reset();
    } else {
      m.b_pref = read_int(node, "b_pref", path + ".b_pref");
    }
  }
  if (node.contains("seq")) {
    m.seq = parse_seq(node.at("seq"), path + ".seq");
  } else if (required) {
    throw ConfigError(path + ".seq", "missing required field");
  }
  field(node, "activation_overhead", path, m.activation_overhead, read_int);
  if (node.contains("sweep_grid")) {
    const json& grid = node.at("sweep_grid");
    if (!grid.is_array()) throw ConfigError(path + ".sweep_grid", "expected an array");
    m.sweep_grid.clear();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const std::string at = path + ".sweep_grid[" + std::to_string(i) + "]";
      if (!grid[i].is_number_integer()) throw ConfigError(at, "expected an integer");
      m.sweep_grid.push_back(grid[i].get<std::int64_t>());
    }
  }
  validate(m, path);
  return m;
}

OffloadPolicy parse_defaults(const json& node) {
  const std::string path = "defaults";
  if (!node.is_object()) throw ConfigError(path, "expected an object");
  reject_unknown_keys(node, {"chunk_bytes", "residency", "policy"}, path);
  Chunked chunked;
  std::string kind = "chunked";
  field(node, "chunk_bytes", path, chunked.chunk_bytes, read_int);
  field(node, "residency", path, chunked.residency, read_double);
  field(node, "policy", path, kind, read_string);
  if (chunked.chunk_bytes <= 0) throw ConfigError(path + ".chunk_bytes", "must be > 0");
  if (!(chunked.residency >= 0 && chunked.residency <= 1)) {
    throw ConfigError(path + ".residency", "residency out of [0,1]");
  }
  try {
    return parse_policy(kind, chunked.chunk_bytes, chunked.residency);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ".policy", e.what());
  }
}

ScheduleOptions parse_schedule(const json& node) {
  const std::string path = "schedule";
  if (!node.is_object()) throw ConfigError(path, "expected an object");
  reject_unknown_keys(node,
                      {"pause_enabled", "prefetch_issue_offset_s", "cross_attention_collective",
                       "collective_volume_factor"},
                      path);
  ScheduleOptions s;
  field(node, "pause_enabled", path, s.pause_enabled, read_bool);
  field(node, "prefetch_issue_offset_s", path, s.prefetch_issue_offset_s, read_double);
  field(node, "cross_attention_collective", path, s.cross_attention_collective, read_bool);
  field(node, "collective_volume_factor", path, s.collective_volume_factor, read_double);
  if (s.prefetch_issue_offset_s < 0) {
    throw ConfigError(path + ".prefetch_issue_offset_s", "must be >= 0");
  }
  if (s.collective_volume_factor < 0) {
    throw ConfigError(path + ".collective_volume_factor", "must be >= 0");
  }
  return s;
}

json arch_to_json(const BlockArch& arch) {
  if (const auto* dit = std::get_if<DitArch>(&arch)) {
    return {{"type", "dit"}, {"num_blocks", dit->num_blocks}};
  }
  const auto& mm = std::get<MmditArch>(arch);
  return {{"type", "mmdit"}, {"n_double", mm.n_double}, {"n_single", mm.n_single}};
}

json seq_to_json(const SequenceFormula& seq) {
  if (const auto* a = std::get_if<AffineSequence>(&seq)) {
    return {{"type", "affine"}, {"scale", a->scale}, {"offset", a->offset}};
  }
  return {{"type", "fixed"}, {"tokens", std::get<FixedSequence>(seq).tokens}};
}

}  // namespace

const ModelSpec& Config::model(std::string_view name) const {
  for (const auto& m : models) {
    if (m.name == name) return m;
  }
  throw UnknownModelError(std::string(name));
}

Config load_config(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    // An empty document is a configuration without a hardware profile, not a
    // syntax problem.
    if (document.find_first_not_of(" \t\r\n") == std::string_view::npos) {
      throw ConfigError("hardware", "no hardware profile");
    }
    throw ConfigError("", std::string("parse error: ") + e.what());
  }
  if (doc.is_null() || (doc.is_object() && doc.empty())) {
    throw ConfigError("hardware", "no hardware profile");
  }
  if (!doc.is_object()) throw ConfigError("", "top level must be an object");
  reject_unknown_keys(doc, {"hardware", "models", "defaults", "schedule"}, "");
  if (!doc.contains("hardware")) throw ConfigError("hardware", "no hardware profile");

  Config config;
  config.hardware = parse_hardware(require_object(doc, "hardware", "hardware"));
  if (doc.contains("models")) {
    const json& models = doc.at("models");
    if (!models.is_array()) throw ConfigError("models", "expected an array");
    for (std::size_t i = 0; i < models.size(); ++i) {
      config.models.push_back(parse_model(models[i], "models[" + std::to_string(i) + "]"));
    }
  }
  if (doc.contains("defaults")) config.default_policy = parse_defaults(doc.at("defaults"));
  if (doc.contains("schedule")) config.schedule = parse_schedule(doc.at("schedule"));
  return config;
}

Config load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_config(buf.str());
}

Config builtin_config() {
  Config config;
  config.hardware = preset(preset_names().front()).first;
  for (const auto& name : preset_names()) config.models.push_back(preset(name).second);
  return config;
}

std::string serialize_config(const Config& config) {
  const HardwareProfile& hw = config.hardware;
  json doc;
  doc["hardware"] = {{"p_peak", hw.p_peak},
                     {"bw_h2d", hw.bw_h2d},
                     {"eta_comp", hw.eta_comp},
                     {"eta_pref", hw.eta_pref},
                     {"t_dma", hw.t_dma},
                     {"bw_coll", hw.bw_coll},
                     {"t_coll_latency", hw.t_coll_latency},
                     {"t_pause_resume", hw.t_pause_resume},
                     {"gpu_count", hw.gpu_count}};
  doc["models"] = json::array();
  for (const ModelSpec& m : config.models) {
    json node = {{"name", m.name},
                 {"arch", arch_to_json(m.arch)},
                 {"d", m.d},
                 {"f", m.f},
                 {"l_ctx", m.l_ctx},
                 {"beta", m.beta},
                 {"beta_act", m.beta_act},
                 {"seq", seq_to_json(m.seq)},
                 {"activation_overhead", m.activation_overhead},
                 {"sweep_grid", m.sweep_grid}};
    node["b_pref"] = m.b_pref ? json(*m.b_pref) : json(nullptr);
    doc["models"].push_back(std::move(node));
  }
  json defaults = {{"policy", std::string(policy_name(config.default_policy))}};
  if (const auto* c = std::get_if<Chunked>(&config.default_policy)) {
    defaults["chunk_bytes"] = c->chunk_bytes;
    defaults["residency"] = c->residency;
  }
  doc["defaults"] = std::move(defaults);
  const ScheduleOptions& s = config.schedule;
  doc["schedule"] = {{"pause_enabled", s.pause_enabled},
                     {"prefetch_issue_offset_s", s.prefetch_issue_offset_s},
                     {"cross_attention_collective", s.cross_attention_collective},
                     {"collective_volume_factor", s.collective_volume_factor}};
  return doc.dump(2) + "\n";
}

}  // namespace offload
