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

#include "offload/pcie_sim.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <deque>
#include <future>
#include <string>

#include <json.hpp>

#include "offload/errors.hpp"

namespace offload {

namespace {

constexpr SimDuration kForever = SimDuration::max();

struct PendingChunk {
  int layer = 0;
  int index = 0;
  std::int64_t bytes = 0;
  SimDuration ready{};
};

struct PendingIssue {
  int layer = 0;
  SimDuration at{};
};

class StepSimulator {
 public:
  StepSimulator(const ModelSpec& model, const WorkloadPoint& w, const HardwareProfile& hw,
                const OffloadPolicy& policy, const ScheduleOptions& options)
      : model_(model), hw_(hw), policy_(policy), options_(options),
        layout_(chunk_layout(prefetch_bytes(model), policy)), kinds_(block_sequence(model)) {
    for (BlockKind kind : {BlockKind::kDit, BlockKind::kDoubleStream, BlockKind::kSingleStream}) {
      plans_[static_cast<int>(kind)] = phase_plan(model, w, kind, options);
    }
    streaming_ = layout_.streamed_chunks() > 0;
    pausing_ = streaming_ && std::holds_alternative<Chunked>(policy) && options.pause_enabled;
    arrival_.assign(kinds_.size(), SimDuration::zero());
  }

  StepBreakdown run() {
    const int n_layers = static_cast<int>(kinds_.size());
    if (n_layers == 0) throw SimulationError("model '" + model_.name + "' has no blocks");

    const SimDuration issue_offset = from_seconds(options_.prefetch_issue_offset_s);
    for (int layer = 0; layer < n_layers; ++layer) {
      wait_for_layer(layer, layer, "wait_params");
      if (streaming_) pending_ = PendingIssue{(layer + 1) % n_layers, now_ + issue_offset};
      for (const Phase& phase : plans_[static_cast<int>(kinds_[layer])].phases) {
        if (const auto* c = std::get_if<ComputePhase>(&phase)) {
          const SimDuration d = from_seconds(c->flops / hw_.compute_roof());
          emit(now_, now_ + d, EventCategory::kCompute, layer, std::string(c->label));
          now_ += d;
        } else {
          run_collective(std::get<CollectivePhase>(phase), layer);
        }
      }
      if (pending_) issue_prefetch(std::min(pending_->at, now_));
    }
    // The next step's first layer must land before that step can start.
    if (streaming_) wait_for_layer(0, n_layers, "wait_params_next_step");

    StepBreakdown out;
    out.policy = std::string(policy_name(policy_));
    out.layout = layout_;
    out.n_layers = n_layers;
    out.step_time = now_;
    if (out.step_time <= SimDuration::zero()) {
      throw SimulationError("zero-duration step for model '" + model_.name + "'");
    }
    out.peak_param_bytes = n_layers * layout_.resident_bytes() + 2 * layout_.streamed_bytes() +
                           model_.activation_overhead;
    out.total_h2d_bytes = n_layers * layout_.streamed_bytes();
    out.pausing = pausing_;
    if (streaming_) {
      std::int64_t largest = 0;
      for (int i = layout_.resident_chunks; i < layout_.n_chunks; ++i) {
        largest = std::max(largest, layout_.chunk_size(i));
      }
      out.chunk_service_bound = service_time(largest);
    }
    std::stable_sort(trace_.begin(), trace_.end(),
                     [](const TraceEvent& a, const TraceEvent& b) { return a.start < b.start; });
    for (const TraceEvent& e : trace_) {
      switch (e.category) {
        case EventCategory::kCompute:
          out.compute += e.duration();
          break;
        case EventCategory::kCollective:
          out.collective += e.duration();
          break;
        case EventCategory::kPrefetchStall:
          out.prefetch_stall += e.duration();
          break;
        case EventCategory::kContentionStall:
          out.contention_stall += e.duration();
          break;
        case EventCategory::kOverhead:
          out.overhead += e.duration();
          break;
        case EventCategory::kH2dChunk:
          break;
      }
    }
    out.trace = std::move(trace_);
    return out;
  }

 private:
  SimDuration service_time(std::int64_t bytes) const {
    return from_seconds(hw_.t_dma + static_cast<double>(bytes) / hw_.h2d_roof());
  }

  void emit(SimDuration start, SimDuration end, EventCategory category, int layer,
            std::string label) {
    if (end <= start) return;
    trace_.push_back({start, end, category, layer, std::move(label)});
  }

  std::string chunk_label(int index) const {
    return layout_.n_chunks == 1 ? "layer" : "chunk " + std::to_string(index);
  }

  // Places one occupancy on the FIFO receive port.
  SimDuration occupy_rx(SimDuration arrival, SimDuration service, SimDuration* end) {
    const SimDuration start = std::max(arrival, rx_free_);
    *end = start + service;
    rx_free_ = *end;
    return start;
  }

  void issue_prefetch(SimDuration at) {
    const int layer = pending_->layer;
    pending_.reset();
    if (pausing_) {
      for (int i = layout_.resident_chunks; i < layout_.n_chunks; ++i) {
        queue_.push_back({layer, i, layout_.chunk_size(i), at});
      }
      return;
    }
    // Without pausing every chunk is handed to the port at issue time.
    for (int i = layout_.resident_chunks; i < layout_.n_chunks; ++i) {
      SimDuration end;
      const SimDuration start = occupy_rx(at, service_time(layout_.chunk_size(i)), &end);
      emit(start, end, EventCategory::kH2dChunk, layer, chunk_label(i));
      arrival_[layer] = end;
    }
  }

  // The worker keeps one chunk in flight and checks the pause flag before
  // each launch; launches at or after `t` wait for events at `t`.
  void launch_chunks_before(SimDuration t) {
    while (!queue_.empty()) {
      const PendingChunk& c = queue_.front();
      const SimDuration launch = std::max(worker_ready_, c.ready);
      if (launch >= t) break;
      SimDuration end;
      const SimDuration start = occupy_rx(launch, service_time(c.bytes), &end);
      emit(start, end, EventCategory::kH2dChunk, c.layer, chunk_label(c.index));
      worker_ready_ = end;
      arrival_[c.layer] = end;
      queue_.pop_front();
    }
  }

  void wait_for_layer(int layer, int trace_layer, const char* label) {
    if (!streaming_) return;
    if (pausing_) launch_chunks_before(kForever);
    const SimDuration ready = arrival_[layer];
    if (ready > now_) {
      emit(now_, ready, EventCategory::kPrefetchStall, trace_layer, label);
      now_ = ready;
    }
  }

  void run_collective(const CollectivePhase& phase, int layer) {
    if (phase.bytes <= 0.0) return;
    if (pending_ && pending_->at <= now_) issue_prefetch(pending_->at);
    const SimDuration issued = now_;
    if (pausing_) launch_chunks_before(issued);
    SimDuration end;
    const SimDuration service = from_seconds(hw_.t_coll_latency + phase.bytes / hw_.bw_coll);
    const SimDuration start = occupy_rx(issued, service, &end);
    emit(issued, start, EventCategory::kContentionStall, layer, "queued_behind_h2d");
    emit(start, end, EventCategory::kCollective, layer, std::string(phase.label));
    now_ = end;
    if (pausing_) {
      worker_ready_ = std::max(worker_ready_, end);
      const SimDuration sync = from_seconds(hw_.t_pause_resume);
      emit(now_, now_ + sync, EventCategory::kOverhead, layer, "pause_resume");
      now_ += sync;
    }
  }

  const ModelSpec& model_;
  const HardwareProfile& hw_;
  const OffloadPolicy& policy_;
  const ScheduleOptions& options_;
  ChunkLayout layout_;
  std::vector<BlockKind> kinds_;
  BlockPhasePlan plans_[3];
  bool streaming_ = false;
  bool pausing_ = false;

  SimDuration now_{};
  SimDuration rx_free_{};
  SimDuration worker_ready_{};
  std::deque<PendingChunk> queue_;
  std::optional<PendingIssue> pending_;
  std::vector<SimDuration> arrival_;
  std::vector<TraceEvent> trace_;
};

std::string format_seconds(SimDuration d) {
  // Picosecond resolution printed as seconds with 12 decimals.
  const std::int64_t ps = d.count();
  const std::int64_t whole = ps / 1'000'000'000'000;
  std::int64_t frac = ps % 1'000'000'000'000;
  const char* sign = "";
  if (ps < 0) {
    sign = "-";
    frac = -frac;
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%" PRId64 ".%012" PRId64, sign, whole < 0 ? -whole : whole,
                frac);
  return buf;
}

}  // namespace

SimDuration from_seconds(double seconds) { return SimDuration(std::llround(seconds * 1e12)); }

double to_seconds(SimDuration d) { return static_cast<double>(d.count()) * 1e-12; }

std::string_view category_name(EventCategory c) {
  switch (c) {
    case EventCategory::kCompute:
      return "compute";
    case EventCategory::kCollective:
      return "collective";
    case EventCategory::kPrefetchStall:
      return "prefetch_stall";
    case EventCategory::kContentionStall:
      return "contention_stall";
    case EventCategory::kOverhead:
      return "overhead";
    case EventCategory::kH2dChunk:
      return "h2d_chunk";
  }
  return "unknown";
}

std::int64_t ChunkLayout::chunk_size(int index) const {
  if (index < n_chunks - 1) return chunk_bytes;
  return layer_bytes - static_cast<std::int64_t>(n_chunks - 1) * chunk_bytes;
}

std::int64_t ChunkLayout::resident_bytes() const {
  if (resident_chunks >= n_chunks) return layer_bytes;
  return static_cast<std::int64_t>(resident_chunks) * chunk_bytes;
}

double ChunkLayout::effective_residency() const {
  return layer_bytes > 0 ? static_cast<double>(resident_bytes()) / layer_bytes : 0.0;
}

ChunkLayout chunk_layout(std::int64_t layer_bytes, const OffloadPolicy& policy) {
  ChunkLayout l;
  l.layer_bytes = layer_bytes;
  if (std::holds_alternative<NoOffload>(policy)) {
    l.chunk_bytes = layer_bytes;
    l.n_chunks = 1;
    l.resident_chunks = 1;
    return l;
  }
  if (std::holds_alternative<WholeLayer>(policy)) {
    l.chunk_bytes = layer_bytes;
    l.n_chunks = 1;
    l.resident_chunks = 0;
    return l;
  }
  const Chunked& c = std::get<Chunked>(policy);
  if (c.chunk_bytes <= 0) throw SimulationError("chunk size must be > 0");
  if (!(c.residency >= 0.0 && c.residency <= 1.0)) {
    throw SimulationError("residency must lie in [0, 1]");
  }
  l.chunk_bytes = std::min(c.chunk_bytes, layer_bytes);
  l.n_chunks = static_cast<int>((layer_bytes + l.chunk_bytes - 1) / l.chunk_bytes);
  const double target = c.residency * l.n_chunks;
  l.resident_chunks = std::clamp(static_cast<int>(std::floor(target + 0.5)), 0, l.n_chunks);
  return l;
}

StepBreakdown simulate_step(const ModelSpec& model, const WorkloadPoint& w,
                            const HardwareProfile& hw, const OffloadPolicy& policy,
                            const ScheduleOptions& options) {
  return StepSimulator(model, w, hw, policy, options).run();
}

std::vector<SweepRow> simulate_sweep(const ModelSpec& model, const HardwareProfile& hw,
                                     const SweepGrid& grid, const ScheduleOptions& options) {
  std::vector<std::future<StepBreakdown>> jobs;
  for (std::int64_t value : grid.values) {
    const WorkloadPoint w = sweep_point(model, grid.variable, value, grid.sp_degree,
                                       grid.fixed_batch, grid.fixed_frames);
    for (const OffloadPolicy& policy : grid.policies) {
      jobs.push_back(std::async(std::launch::async, [&model, &hw, &options, w, policy] {
        return simulate_step(model, w, hw, policy, options);
      }));
    }
  }
  std::vector<SweepRow> rows;
  rows.reserve(jobs.size());
  std::size_t next = 0;
  for (std::int64_t value : grid.values) {
    for (const OffloadPolicy& policy : grid.policies) {
      rows.push_back({value, policy, jobs[next++].get()});
    }
  }
  return rows;
}

std::vector<std::string> validate_trace(const StepBreakdown& b) {
  std::vector<std::string> violations;
  const auto report = [&](std::string msg) { violations.push_back(std::move(msg)); };

  std::vector<const TraceEvent*> timeline;
  std::vector<const TraceEvent*> rx;
  std::vector<const TraceEvent*> h2d;
  for (const TraceEvent& e : b.trace) {
    if (e.end < e.start) {
      report("event '" + e.label + "' ends before it starts at " + format_seconds(e.start) + " s");
    }
    if (on_critical_timeline(e.category)) timeline.push_back(&e);
    if (occupies_rx(e.category)) rx.push_back(&e);
    if (e.category == EventCategory::kH2dChunk) h2d.push_back(&e);
  }
  const auto by_start = [](const TraceEvent* a, const TraceEvent* b) {
    return a->start < b->start;
  };
  std::stable_sort(timeline.begin(), timeline.end(), by_start);
  std::stable_sort(rx.begin(), rx.end(), by_start);
  std::stable_sort(h2d.begin(), h2d.end(), by_start);

  // Compute timeline tiles [0, end) without gaps or overlaps.
  SimDuration cursor{};
  SimDuration sums[5] = {};
  for (const TraceEvent* e : timeline) {
    if (e->start != cursor) {
      report("compute timeline " + std::string(e->start > cursor ? "gap" : "overlap") + " at " +
             format_seconds(std::min(e->start, cursor)) + " s");
    }
    cursor = e->end;
    sums[static_cast<int>(e->category)] += e->duration();
  }
  SimDuration total{};
  for (SimDuration s : sums) total += s;
  if (total != b.step_time) {
    report("categories sum to " + format_seconds(total) + " s but step time is " +
           format_seconds(b.step_time) + " s");
  }
  const std::pair<const char*, SimDuration> fields[5] = {
      {"compute", b.compute},
      {"collective", b.collective},
      {"prefetch_stall", b.prefetch_stall},
      {"contention_stall", b.contention_stall},
      {"overhead", b.overhead}};
  for (int i = 0; i < 5; ++i) {
    if (fields[i].second != sums[i]) {
      report(std::string(fields[i].first) + " field " + format_seconds(fields[i].second) +
             " s disagrees with its trace total " + format_seconds(sums[i]) + " s");
    }
  }

  // At most one receive-port occupancy at any instant.
  const TraceEvent* latest = nullptr;
  for (const TraceEvent* e : rx) {
    if (latest != nullptr && e->start < latest->end) {
      report("receive port overlap: '" + latest->label + "' and '" + e->label + "' at " +
             format_seconds(e->start) + " s");
    }
    if (latest == nullptr || e->end > latest->end) latest = e;
  }

  // A collective only queues behind prefetch traffic already on the port.
  for (const TraceEvent& e : b.trace) {
    if (e.category != EventCategory::kContentionStall) continue;
    if (b.pausing && e.duration() > b.chunk_service_bound) {
      report("contention stall of " + format_seconds(e.duration()) + " s at " +
             format_seconds(e.start) + " s exceeds one chunk service time " +
             format_seconds(b.chunk_service_bound) + " s");
    }
    SimDuration covered = e.start;
    for (const TraceEvent* h : h2d) {
      if (h->start <= covered && h->end > covered) covered = h->end;
      if (covered >= e.end) break;
    }
    if (covered < e.end) {
      report("contention stall at " + format_seconds(e.start) +
             " s is not covered by in-flight transfers");
    }
  }
  return violations;
}

std::string trace_to_jsonl(const StepBreakdown& b) {
  std::string out;
  for (const TraceEvent& e : b.trace) {
    out += "{\"t_start\":" + format_seconds(e.start) + ",\"t_end\":" + format_seconds(e.end) +
           ",\"category\":\"" + std::string(category_name(e.category)) +
           "\",\"layer\":" + std::to_string(e.layer) +
           ",\"label\":" + nlohmann::json(e.label).dump() + "}\n";
  }
  return out;
}

}  // namespace offload
