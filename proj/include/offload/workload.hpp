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
#include <string_view>
#include <variant>
#include <vector>

#include "offload/calibration.hpp"
#include "offload/policy.hpp"

namespace offload {

enum class BlockKind { kDit, kDoubleStream, kSingleStream };

std::string_view block_kind_name(BlockKind kind);

// Dominant per-block FLOP terms, global (before any parallel split). The
// formulas are written once over a generic scalar so the same expressions
// serve exact integer evaluation and the real-relaxed threshold solver.
template <class T>
struct DitTerms {
  T self_proj, self_attn, cross_proj, cross_attn, mlp;

  T total() const { return self_proj + self_attn + cross_proj + cross_attn + mlp; }
};

template <class T>
struct DoubleStreamTerms {
  T img_proj, txt_proj, joint_attn, img_mlp, txt_mlp;

  T total() const { return img_proj + txt_proj + joint_attn + img_mlp + txt_mlp; }
};

template <class T>
struct SingleStreamTerms {
  T lin1, attn, lin2;

  T total() const { return lin1 + attn + lin2; }
};

template <class T>
DitTerms<T> dit_terms(T B, T S, T d, T f, T l_ctx) {
  return {8 * B * S * d * d,
          4 * B * S * S * d,
          4 * B * S * d * d + 4 * B * l_ctx * d * d,
          4 * B * S * l_ctx * d,
          4 * B * S * d * f};
}

template <class T>
DoubleStreamTerms<T> double_stream_terms(T B, T S, T d, T f, T l_ctx) {
  const T joint = S + l_ctx;
  return {8 * B * S * d * d,
          8 * B * l_ctx * d * d,
          4 * B * joint * joint * d,
          4 * B * S * d * f,
          4 * B * l_ctx * d * f};
}

template <class T>
SingleStreamTerms<T> single_stream_terms(T B, T S, T d, T f, T l_ctx) {
  const T tokens = S + l_ctx;
  return {2 * B * tokens * d * (3 * d + f),
          4 * B * tokens * tokens * d,
          2 * B * tokens * (d + f) * d};
}

template <class T>
T block_flops(BlockKind kind, T B, T S, T d, T f, T l_ctx) {
  switch (kind) {
    case BlockKind::kDit:
      return dit_terms(B, S, d, f, l_ctx).total();
    case BlockKind::kDoubleStream:
      return double_stream_terms(B, S, d, f, l_ctx).total();
    case BlockKind::kSingleStream:
      return single_stream_terms(B, S, d, f, l_ctx).total();
  }
  return T{};
}

struct FlopTerm {
  std::string_view name;
  double flops = 0.0;
};

// Terms are evaluated in 128-bit integers and rounded once to double, so
// `total()` is the correctly rounded sum of the exact terms.
class FlopBreakdown {
 public:
  FlopBreakdown(BlockKind kind, std::vector<FlopTerm> terms, double total)
      : kind_(kind), terms_(std::move(terms)), total_(total) {}

  BlockKind kind() const { return kind_; }
  const std::vector<FlopTerm>& terms() const { return terms_; }
  double total() const { return total_; }

  // Throws std::out_of_range for a name this block type does not have.
  double operator[](std::string_view name) const;

 private:
  BlockKind kind_;
  std::vector<FlopTerm> terms_;
  double total_;
};

FlopBreakdown flops_dit_block(std::int64_t B, std::int64_t S, std::int64_t d, std::int64_t f,
                              std::int64_t l_ctx);
FlopBreakdown flops_mmdit_double(std::int64_t B, std::int64_t S, std::int64_t d, std::int64_t f,
                                 std::int64_t l_ctx);
FlopBreakdown flops_mmdit_single(std::int64_t B, std::int64_t S, std::int64_t d, std::int64_t f,
                                 std::int64_t l_ctx);

// Per-block FLOPs for the model's architecture; MM-DiT models average the
// two block types weighted by their counts.
double flops_block_avg(const ModelSpec& model, std::int64_t B, std::int64_t S);

// Real-relaxed variant used by the threshold solver.
double flops_block_avg_real(const ModelSpec& model, double B, double S);

inline double per_gpu_flops(double flops, int sp_degree) { return flops / sp_degree; }

struct WorkloadPoint {
  std::int64_t batch = 1;
  std::optional<std::int64_t> frames;
  std::int64_t seq_len = 1;
  int sp_degree = 1;
};

// Frames must be given exactly when the model's sequence formula is affine.
std::int64_t seq_len(const ModelSpec& model, std::optional<std::int64_t> frames);
double seq_len_real(const ModelSpec& model, double frames);

// Builds a workload with S from the model's formula. Throws WorkloadError.
WorkloadPoint make_workload(const ModelSpec& model, std::optional<std::int64_t> frames,
                            std::int64_t batch, int sp_degree);

// Builds the workload for one point of the model's natural sweep.
WorkloadPoint sweep_point(const ModelSpec& model, SweepVariable var, std::int64_t value,
                          int sp_degree, std::int64_t fixed_batch = 1,
                          std::optional<std::int64_t> fixed_frames = std::nullopt);

// All-to-all receive volume per GPU: B * S_eff * d * beta_act * (p-1)/p.
double collective_bytes(std::int64_t B, std::int64_t S_eff, std::int64_t d, double beta_act,
                        int p);

// Token count an all-to-all moves: S for DiT, S + l_ctx for joint attention.
std::int64_t collective_tokens(const ModelSpec& model, BlockKind kind, std::int64_t S);

struct ComputePhase {
  double flops = 0.0;  // per GPU
  std::string_view label;
};

struct CollectivePhase {
  double bytes = 0.0;  // received per GPU
  std::string_view label;
};

using Phase = std::variant<ComputePhase, CollectivePhase>;

/// Compute segments interleaved with the block's all-to-alls:
/// QKV projection | a2a | attention | a2a | remainder.
/// Begins and ends with a compute phase.
struct BlockPhasePlan {
  BlockKind kind = BlockKind::kDit;
  std::vector<Phase> phases;

  double compute_flops() const;
  std::size_t collective_count() const;
};

BlockPhasePlan phase_plan(const ModelSpec& model, const WorkloadPoint& w, BlockKind kind,
                          const ScheduleOptions& options = {});

// Block kinds in execution order (double-stream blocks before single-stream).
std::vector<BlockKind> block_sequence(const ModelSpec& model);

}  // namespace offload
