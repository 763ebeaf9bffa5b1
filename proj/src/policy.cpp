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

#include "offload/policy.hpp"

#include <stdexcept>
#include <string>

namespace offload {

std::string_view policy_name(const OffloadPolicy& policy) {
  switch (policy.index()) {
    case 0:
      return "no_offload";
    case 1:
      return "whole_layer";
    default:
      return "chunked";
  }
}

OffloadPolicy parse_policy(std::string_view name, std::int64_t chunk_bytes, double residency) {
  std::string key(name);
  for (char& c : key) {
    if (c == '-') c = '_';
  }
  if (key == "no_offload") return NoOffload{};
  if (key == "whole_layer") return WholeLayer{};
  if (key == "chunked") return Chunked{chunk_bytes, residency};
  throw std::invalid_argument("unknown policy '" + std::string(name) +
                              "' (expected no_offload, whole_layer or chunked)");
}

}  // namespace offload
