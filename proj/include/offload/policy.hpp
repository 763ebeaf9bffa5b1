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
#include <string>
#include <string_view>
#include <variant>

namespace offload {

// Decimal megabyte; every byte quantity in the presets is stated in MB.
inline constexpr std::int64_t kMegabyte = 1'000'000;

struct NoOffload {};

struct WholeLayer {};

// Chunk-granular prefetch. The first round(residency * n_chunks) chunks of
// every layer stay resident; the rest are streamed one chunk at a time.
struct Chunked {
  std::int64_t chunk_bytes = 16 * kMegabyte;
  double residency = 0.0;
};

using OffloadPolicy = std::variant<NoOffload, WholeLayer, Chunked>;

std::string_view policy_name(const OffloadPolicy& policy);

// Accepts "no_offload", "whole_layer" and "chunked" (dashes allowed).
// Throws std::invalid_argument for anything else.
OffloadPolicy parse_policy(std::string_view name, std::int64_t chunk_bytes = 16 * kMegabyte,
                           double residency = 0.0);

// Schedule knobs that are not platform constants.
struct ScheduleOptions {
  // Chunked only: the prefetch worker yields to collectives at chunk
  // boundaries. When false all chunks of a layer are queued at once.
  bool pause_enabled = true;
  // Delay between the start of a layer's compute and the issue of the next
  // layer's prefetch.
  double prefetch_issue_offset_s = 0.0;
  // Adds a third all-to-all in front of cross-attention (DiT only).
  bool cross_attention_collective = false;
  // Multiplies the (p-1)/p all-to-all receive volume.
  double collective_volume_factor = 1.0;
};

}  // namespace offload
