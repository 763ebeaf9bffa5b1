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

#include "offload/workload.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "offload/errors.hpp"

namespace offload {

namespace {

__extension__ using Int128 = __int128;

double to_double(Int128 v) { return static_cast<double>(v); }

FlopBreakdown make_breakdown(BlockKind kind, std::initializer_list<std::pair<std::string_view, Int128>> exact) {
  std::vector<FlopTerm> terms;
  Int128 sum = 0;
  for (const auto& [name, value] : exact) {
    terms.push_back({name, to_double(value)});
    sum += value;
  }
  return FlopBreakdown(kind, std::move(terms), to_double(sum));
}

Int128 exact_block_flops(BlockKind kind, std::int64_t B, std::int64_t S, std::int64_t d,
                         std::int64_t f, std::int64_t l_ctx) {
  return block_flops<Int128>(kind, B, S, d, f, l_ctx);
}

}  // namespace

std::string_view block_kind_name(BlockKind kind) {
  switch (kind) {
    case BlockKind::kDit:
      return "dit";
    case BlockKind::kDoubleStream:
      return "double_stream";
    case BlockKind::kSingleStream:
      return "single_stream";
  }
  return "unknown";
}

double FlopBreakdown::operator[](std::string_view name) const {
  for (const auto& t : terms_) {
    if (t.name == name) return t.flops;
  }
  throw std::out_of_range("no FLOP term '" + std::string(name) + "' in a " +
                          std::string(block_kind_name(kind_)) + " block");
}

FlopBreakdown flops_dit_block(std::int64_t B, std::int64_t S, std::int64_t d, std::int64_t f,
                              std::int64_t l_ctx) {
  const auto t = dit_terms<Int128>(B, S, d, f, l_ctx);
  return make_breakdown(BlockKind::kDit, {{"self_proj", t.self_proj},
                                          {"self_attn", t.self_attn},
                                          {"cross_proj", t.cross_proj},
                                          {"cross_attn", t.cross_attn},
                                          {"mlp", t.mlp}});
}

FlopBreakdown flops_mmdit_double(std::int64_t B, std::int64_t S, std::int64_t d, std::int64_t f,
                                 std::int64_t l_ctx) {
  const auto t = double_stream_terms<Int128>(B, S, d, f, l_ctx);
  return make_breakdown(BlockKind::kDoubleStream, {{"img_proj", t.img_proj},
                                                   {"txt_proj", t.txt_proj},
                                                   {"joint_attn", t.joint_attn},
                                                   {"img_mlp", t.img_mlp},
                                                   {"txt_mlp", t.txt_mlp}});
}

FlopBreakdown flops_mmdit_single(std::int64_t B, std::int64_t S, std::int64_t d, std::int64_t f,
                                 std::int64_t l_ctx) {
  const auto t = single_stream_terms<Int128>(B, S, d, f, l_ctx);
  return make_breakdown(BlockKind::kSingleStream,
                        {{"lin1", t.lin1}, {"attn", t.attn}, {"lin2", t.lin2}});
}

double flops_block_avg(const ModelSpec& m, std::int64_t B, std::int64_t S) {
  if (const auto* mm = std::get_if<MmditArch>(&m.arch)) {
    const Int128 sum =
        mm->n_double * exact_block_flops(BlockKind::kDoubleStream, B, S, m.d, m.f, m.l_ctx) +
        mm->n_single * exact_block_flops(BlockKind::kSingleStream, B, S, m.d, m.f, m.l_ctx);
    const int blocks = mm->n_double + mm->n_single;
    if (sum % blocks == 0) return to_double(sum / blocks);
    return to_double(sum) / blocks;
  }
  return to_double(exact_block_flops(BlockKind::kDit, B, S, m.d, m.f, m.l_ctx));
}

double flops_block_avg_real(const ModelSpec& m, double B, double S) {
  const double d = static_cast<double>(m.d);
  const double f = static_cast<double>(m.f);
  const double l = static_cast<double>(m.l_ctx);
  if (const auto* mm = std::get_if<MmditArch>(&m.arch)) {
    const double dbl = block_flops(BlockKind::kDoubleStream, B, S, d, f, l);
    const double sng = block_flops(BlockKind::kSingleStream, B, S, d, f, l);
    return (mm->n_double * dbl + mm->n_single * sng) / (mm->n_double + mm->n_single);
  }
  return block_flops(BlockKind::kDit, B, S, d, f, l);
}

std::int64_t seq_len(const ModelSpec& model, std::optional<std::int64_t> frames) {
  if (const auto* a = std::get_if<AffineSequence>(&model.seq)) {
    if (!frames) {
      throw WorkloadError("model '" + model.name + "' derives S from a frame count; none given");
    }
    if (*frames < 1) throw WorkloadError("frame count must be >= 1");
    return a->scale * (*frames + a->offset);
  }
  if (frames) {
    throw WorkloadError("model '" + model.name + "' has a fixed sequence length; frames given");
  }
  return std::get<FixedSequence>(model.seq).tokens;
}

double seq_len_real(const ModelSpec& model, double frames) {
  if (const auto* a = std::get_if<AffineSequence>(&model.seq)) {
    return static_cast<double>(a->scale) * (frames + static_cast<double>(a->offset));
  }
  return static_cast<double>(std::get<FixedSequence>(model.seq).tokens);
}

WorkloadPoint make_workload(const ModelSpec& model, std::optional<std::int64_t> frames,
                            std::int64_t batch, int sp_degree) {
  if (batch < 1) throw WorkloadError("batch must be >= 1");
  if (sp_degree < 1) throw WorkloadError("sp_degree must be >= 1");
  WorkloadPoint w;
  w.batch = batch;
  w.frames = frames;
  w.seq_len = seq_len(model, frames);
  w.sp_degree = sp_degree;
  return w;
}

WorkloadPoint sweep_point(const ModelSpec& model, SweepVariable var, std::int64_t value,
                          int sp_degree, std::int64_t fixed_batch,
                          std::optional<std::int64_t> fixed_frames) {
  if (var == SweepVariable::kFrames) return make_workload(model, value, fixed_batch, sp_degree);
  return make_workload(model, fixed_frames, value, sp_degree);
}

double collective_bytes(std::int64_t B, std::int64_t S_eff, std::int64_t d, double beta_act,
                        int p) {
  if (p <= 1) return 0.0;
  return static_cast<double>(B) * static_cast<double>(S_eff) * static_cast<double>(d) *
         beta_act * (p - 1) / p;
}

std::int64_t collective_tokens(const ModelSpec& model, BlockKind kind, std::int64_t S) {
  return kind == BlockKind::kDit ? S : S + model.l_ctx;
}

double BlockPhasePlan::compute_flops() const {
  double sum = 0.0;
  for (const auto& p : phases) {
    if (const auto* c = std::get_if<ComputePhase>(&p)) sum += c->flops;
  }
  return sum;
}

std::size_t BlockPhasePlan::collective_count() const {
  std::size_t n = 0;
  for (const auto& p : phases) n += std::holds_alternative<CollectivePhase>(p) ? 1 : 0;
  return n;
}

BlockPhasePlan phase_plan(const ModelSpec& model, const WorkloadPoint& w, BlockKind kind,
                          const ScheduleOptions& options) {
  const Int128 B = w.batch;
  const Int128 S = w.seq_len;
  const Int128 d = model.d;
  const Int128 f = model.f;
  const Int128 l = model.l_ctx;
  const int p = w.sp_degree;

  // QKV share of the projections ahead of the first all-to-all, and the
  // quadratic attention term between the two.
  Int128 qkv = 0;
  Int128 attn = 0;
  Int128 total = 0;
  switch (kind) {
    case BlockKind::kDit: {
      const auto t = dit_terms(B, S, d, f, l);
      qkv = 6 * B * S * d * d;
      attn = t.self_attn;
      total = t.total();
      break;
    }
    case BlockKind::kDoubleStream: {
      const auto t = double_stream_terms(B, S, d, f, l);
      qkv = 6 * B * (S + l) * d * d;
      attn = t.joint_attn;
      total = t.total();
      break;
    }
    case BlockKind::kSingleStream: {
      // lin1 * 3d / (3d + f): the QKV columns of the fused projection.
      const auto t = single_stream_terms(B, S, d, f, l);
      qkv = 6 * B * (S + l) * d * d;
      attn = t.attn;
      total = t.total();
      break;
    }
  }
  const Int128 rest = total - qkv - attn;

  const double a2a = collective_bytes(w.batch, collective_tokens(model, kind, w.seq_len), model.d,
                                      model.beta_act, p) *
                     options.collective_volume_factor;
  const auto compute = [p](Int128 flops, std::string_view label) {
    return ComputePhase{to_double(flops) / p, label};
  };

  BlockPhasePlan plan;
  plan.kind = kind;
  plan.phases = {compute(qkv, "qkv_proj"), CollectivePhase{a2a, "a2a_pre_attn"},
                 compute(attn, "attention"), CollectivePhase{a2a, "a2a_post_attn"}};
  if (kind == BlockKind::kDit && options.cross_attention_collective) {
    // Output projection and cross-attention projections, then the
    // cross-attention itself and the MLP.
    const auto t = dit_terms(B, S, d, f, l);
    const Int128 before_cross = 2 * B * S * d * d + t.cross_proj;
    plan.phases.push_back(compute(before_cross, "out_and_cross_proj"));
    plan.phases.push_back(CollectivePhase{a2a, "a2a_cross_attn"});
    plan.phases.push_back(compute(rest - before_cross, "cross_attn_mlp"));
  } else {
    plan.phases.push_back(compute(rest, "remainder"));
  }
  return plan;
}

std::vector<BlockKind> block_sequence(const ModelSpec& model) {
  std::vector<BlockKind> seq;
  if (const auto* mm = std::get_if<MmditArch>(&model.arch)) {
    seq.insert(seq.end(), mm->n_double, BlockKind::kDoubleStream);
    seq.insert(seq.end(), mm->n_single, BlockKind::kSingleStream);
  } else {
    seq.insert(seq.end(), std::get<DitArch>(model.arch).num_blocks, BlockKind::kDit);
  }
  return seq;
}

}  // namespace offload
