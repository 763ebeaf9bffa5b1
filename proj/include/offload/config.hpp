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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "offload/calibration.hpp"
#include "offload/policy.hpp"

namespace offload {

// A loaded configuration document.
//
//   {"hardware": {...}, "models": [{...}, ...],
//    "defaults": {"chunk_bytes": ..., "residency": ..., "policy": ...},
//    "schedule": {...}}
//
// A "preset" key inside "hardware" or a model entry imports that preset
// before the remaining keys are applied as overrides.
struct Config {
  HardwareProfile hardware;
  std::vector<ModelSpec> models;
  OffloadPolicy default_policy = Chunked{};
  ScheduleOptions schedule;

  // Throws UnknownModelError.
  const ModelSpec& model(std::string_view name) const;
};

Config load_config(std::string_view document);
Config load_config_file(const std::filesystem::path& path);

// Preset hardware plus every preset model.
Config builtin_config();

// Emits every field explicitly; load_config(serialize_config(c)) == c.
std::string serialize_config(const Config& config);

}  // namespace offload
