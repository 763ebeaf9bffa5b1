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

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "offload/calibration.hpp"
#include "offload/policy.hpp"
#include "offload/workload.hpp"

namespace offload {

// Simulated time. Integer picoseconds keep the breakdown identity exact.
using SimDuration = std::chrono::duration<std::int64_t, std::pico>;

SimDuration from_seconds(double seconds);
double to_seconds(SimDuration d);

enum class EventCategory {
  kCompute,
  kCollective,
  kPrefetchStall,
  kContentionStall,
  kOverhead,
  kH2dChunk,
};

std::string_view category_name(EventCategory c);

// Every category except kH2dChunk lies on the compute timeline.
inline bool on_critical_timeline(EventCategory c) { return c != EventCategory::kH2dChunk; }

// Collectives and H2D chunks are the receive-port occupancies.
inline bool occupies_rx(EventCategory c) {
  return c == EventCategory::kCollective || c == EventCategory::kH2dChunk;
}

struct TraceEvent {
  SimDuration start{};
  SimDuration end{};
  EventCategory category = EventCategory::kCompute;
  int layer = 0;
  std::string label;

  SimDuration duration() const { return end - start; }
};

/// Per-layer split of b_pref into chunks. Resident chunks are the first
/// `resident_chunks`; the last chunk carries the remainder.
struct ChunkLayout {
  std::int64_t layer_bytes = 0;
  std::int64_t chunk_bytes = 0;
  int n_chunks = 0;
  int resident_chunks = 0;

  std::int64_t chunk_size(int index) const;
  std::int64_t resident_bytes() const;
  std::int64_t streamed_bytes() const { return layer_bytes - resident_bytes(); }
  int streamed_chunks() const { return n_chunks - resident_chunks; }
  double effective_residency() const;
};

// NoOffload: one resident chunk. WholeLayer: one streamed chunk.
// Chunked: ceil(b_pref / C) chunks, round-half-up(r * n) resident.
ChunkLayout chunk_layout(std::int64_t layer_bytes, const OffloadPolicy& policy);

struct StepBreakdown {
  std::string policy;
  ChunkLayout layout;
  int n_layers = 0;

  SimDuration compute{};
  SimDuration collective{};
  SimDuration prefetch_stall{};
  SimDuration contention_stall{};
  SimDuration overhead{};
  SimDuration step_time{};

  std::int64_t peak_param_bytes = 0;
  std::int64_t total_h2d_bytes = 0;

  // True when collectives pause the chunk stream; the queueing bound is then
  // one chunk's service time, recorded in `chunk_service_bound`.
  bool pausing = false;
  SimDuration chunk_service_bound{};

  std::vector<TraceEvent> trace;

  double compute_s() const { return to_seconds(compute); }
  double collective_s() const { return to_seconds(collective); }
  double prefetch_stall_s() const { return to_seconds(prefetch_stall); }
  double contention_stall_s() const { return to_seconds(contention_stall); }
  double overhead_s() const { return to_seconds(overhead); }
  double step_time_s() const { return to_seconds(step_time); }
};

/// Simulates one denoising step on p symmetric GPUs sharing one receive
/// port model. The step is taken in steady state: layer 0 starts resident
/// (prefetched during the previous step's last layer), the last layer
/// prefetches the next step's layer 0, and the step ends once that transfer
/// has landed.
///
/// Throws SimulationError for a zero-length step or a non-positive chunk
/// size, WorkloadError for a residency outside [0, 1].
StepBreakdown simulate_step(const ModelSpec& model, const WorkloadPoint& w,
                            const HardwareProfile& hw, const OffloadPolicy& policy,
                            const ScheduleOptions& options = {});

struct SweepGrid {
  SweepVariable variable = SweepVariable::kFrames;
  std::vector<std::int64_t> values;
  std::vector<OffloadPolicy> policies;
  std::int64_t fixed_batch = 1;
  std::optional<std::int64_t> fixed_frames;
  int sp_degree = 1;
};

struct SweepRow {
  std::int64_t value = 0;
  OffloadPolicy policy;
  StepBreakdown breakdown;
};

// One row per (value, policy), value-major in the order given. Points may be
// evaluated concurrently; the result order does not depend on it.
std::vector<SweepRow> simulate_sweep(const ModelSpec& model, const HardwareProfile& hw,
                                     const SweepGrid& grid, const ScheduleOptions& options = {});

// Checks receive-port exclusivity, timeline tiling, the category-sum
// identity and the per-collective queueing bound. Empty on success.
std::vector<std::string> validate_trace(const StepBreakdown& breakdown);

// One JSON object per line:
// {"t_start":..,"t_end":..,"category":..,"layer":..,"label":..}
std::string trace_to_jsonl(const StepBreakdown& breakdown);

}  // namespace offload
