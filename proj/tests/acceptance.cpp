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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Reference values are computed here independently of the
// library code paths they check.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "offload/commands.hpp"
#include "offload/overlap.hpp"
#include "offload/pcie_sim.hpp"

using namespace offload;
using boost::multiprecision::cpp_int;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string num(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

const std::vector<std::string> kModels{"wanvideo", "flux", "hunyuanvideo"};

struct Setup {
  HardwareProfile hw;
  ModelSpec model;
  WorkloadPoint at(std::int64_t v) const {
    return sweep_point(model, natural_sweep_variable(model), v, hw.gpu_count);
  }
  StepBreakdown run(std::int64_t v, const OffloadPolicy& p, const ScheduleOptions& o = {}) const {
    return simulate_step(model, at(v), hw, p, o);
  }
};

Setup setup(const std::string& name) {
  auto [hw, m] = preset(name);
  return {hw, m};
}

double ulps(double a, double b) {
  if (a == b) return 0;
  return std::abs(a - b) / (std::nextafter(std::max(a, b), INFINITY) - std::max(a, b));
}

Verdict c1() {
  Verdict v;
  const Config config = builtin_config();
  const double expected[] = {119.2, 11.5, 34.5};
  const double tol[] = {1.0, 0.3, 1.0};
  for (int i = 0; i < 3; ++i) {
    const Prediction p = predict(config, kModels[i]);
    const bool ok = p.critical.status == CrossingStatus::kCrossing &&
                    std::abs(p.critical.value - expected[i]) <= tol[i];
    v.require(ok, kModels[i] + " off target");
    v.note(kModels[i] + " " + num(p.critical.value, 5));
  }
  return v;
}

Verdict c2() {
  Verdict v;
  double worst = 0;
  for (const std::string& name : kModels) {
    const Setup s = setup(name);
    // Brute force: F* is the compute load whose time equals the transfer
    // time; scan decades, then halve the bracket.
    const long double rate = static_cast<long double>(s.hw.eta_comp) * s.hw.p_peak;
    const long double t_xfer = static_cast<long double>(*s.model.b_pref) /
                               (static_cast<long double>(s.hw.eta_pref) * s.hw.bw_h2d);
    long double lo = 0, hi = 1;
    while (hi / rate < t_xfer) hi *= 10;
    for (int i = 0; i < 200; ++i) {
      const long double mid = (lo + hi) / 2;
      (mid / rate < t_xfer ? lo : hi) = mid;
    }
    const double f_oracle = static_cast<double>(hi);
    const double i_oracle = static_cast<double>(hi / *s.model.b_pref);
    const double ef = std::abs(f_star(s.hw, static_cast<double>(*s.model.b_pref)) - f_oracle) / f_oracle;
    const double ei = std::abs(i_star(s.hw) - i_oracle) / i_oracle;
    worst = std::max({worst, ef, ei});
  }
  v.require(worst <= 1e-12, "relative error above 1e-12");
  v.note("max relative error " + num(worst, 3));
  return v;
}

Verdict c3() {
  Verdict v;
  const std::int64_t Bs[] = {1, 2, 4, 12, 33};
  const std::int64_t Ss[] = {1, 4096, 18480, 32400, 250'000};
  double worst = 0;
  int checked = 0;
  for (const std::string& name : kModels) {
    const ModelSpec m = setup(name).model;
    const cpp_int d = m.d, f = m.f, l = m.l_ctx;
    for (std::int64_t Bi : Bs) {
      for (std::int64_t Si : Ss) {
        const cpp_int B = Bi, S = Si;
        std::vector<std::pair<FlopBreakdown, std::vector<cpp_int>>> cases;
        if (std::holds_alternative<DitArch>(m.arch)) {
          cases.emplace_back(flops_dit_block(Bi, Si, m.d, m.f, m.l_ctx),
                             std::vector<cpp_int>{8 * B * S * d * d, 4 * B * S * S * d,
                                                  4 * B * S * d * d + 4 * B * l * d * d,
                                                  4 * B * S * l * d, 4 * B * S * d * f});
        } else {
          const cpp_int T = S + l;
          cases.emplace_back(flops_mmdit_double(Bi, Si, m.d, m.f, m.l_ctx),
                             std::vector<cpp_int>{8 * B * S * d * d, 8 * B * l * d * d,
                                                  4 * B * T * T * d, 4 * B * S * d * f,
                                                  4 * B * l * d * f});
          cases.emplace_back(flops_mmdit_single(Bi, Si, m.d, m.f, m.l_ctx),
                             std::vector<cpp_int>{2 * B * T * d * (3 * d + f), 4 * B * T * T * d,
                                                  2 * B * T * (d + f) * d});
        }
        for (const auto& [got, exact] : cases) {
          cpp_int total = 0;
          for (std::size_t i = 0; i < exact.size(); ++i) {
            worst = std::max(worst, ulps(got.terms()[i].flops, exact[i].convert_to<double>()));
            total += exact[i];
          }
          worst = std::max(worst, ulps(got.total(), total.convert_to<double>()));
          ++checked;
        }
      }
    }
  }
  v.require(worst <= 1.0, "term or total off by more than 1 ULP");
  v.note(std::to_string(checked) + " breakdowns, max " + num(worst, 2) + " ULP");
  return v;
}

Verdict c4() {
  Verdict v;
  Setup s = setup("wanvideo");
  // Choose bw_coll so the step's collectives total 0.45 s at n=81.
  const WorkloadPoint w = s.at(81);
  const double volume = 1.0 * w.seq_len * s.model.d * s.model.beta_act / 2;
  const int collectives = 2 * 30;
  s.hw.bw_coll = volume / (0.45 / collectives - s.hw.t_coll_latency);
  const StepBreakdown none = s.run(81, NoOffload{});
  const StepBreakdown whole = s.run(81, WholeLayer{});
  const double ratio = whole.step_time_s() / none.step_time_s();
  v.require(std::abs(none.collective_s() - 0.45) < 0.01, "collective calibration missed");
  v.require(std::abs(ratio - 1.44) <= 0.15, "ratio outside 1.44 +/- 0.15");
  v.note("collective_s " + num(none.collective_s()) + ", WholeLayer/NoOffload " + num(ratio) +
         " (" + num(none.step_time_s()) + " s -> " + num(whole.step_time_s()) + " s)");
  return v;
}

Verdict c5() {
  Verdict v;
  for (const std::string& name : kModels) {
    const Setup s = setup(name);
    for (std::int64_t x : s.model.sweep_grid) {
      const double none = s.run(x, NoOffload{}).step_time_s();
      const double chunked = s.run(x, Chunked{16 * kMegabyte, 0.0}).step_time_s();
      const double whole = s.run(x, WholeLayer{}).step_time_s();
      v.require(none <= chunked && chunked <= whole, name + " " + std::to_string(x) + " misordered");
      if (x == s.model.sweep_grid.front()) {
        const double speedup = whole / chunked;
        v.require(speedup >= 1.05, name + " speedup below 1.05");
        v.note(name + " speedup " + num(speedup));
      }
    }
  }
  return v;
}

Verdict c6() {
  Verdict v;
  const Config config = builtin_config();
  for (const std::string& name : kModels) {
    const Setup s = setup(name);
    const std::int64_t from = *predict(config, name).critical_rounded;
    for (std::int64_t x : s.model.sweep_grid) {
      if (x < from) continue;
      const double ratio =
          s.run(x, Chunked{16 * kMegabyte, 0.0}).step_time_s() / s.run(x, NoOffload{}).step_time_s();
      v.require(ratio <= 1.05, name + " " + std::to_string(x) + " above 1.05");
      v.note(name + " " + std::to_string(x) + " ratio " + num(ratio));
    }
  }
  return v;
}

Verdict c7() {
  Verdict v;
  int runs = 0;
  int stalls = 0;
  for (const std::string& name : kModels) {
    const Setup s = setup(name);
    const double layer = static_cast<double>(prefetch_bytes(s.model));
    std::vector<OffloadPolicy> policies{NoOffload{}, WholeLayer{}};
    for (std::int64_t mb : {4, 16, 64, 256}) {
      for (double r : {0.0, 0.2, 0.4, 0.6, 1.0}) policies.push_back(Chunked{mb * kMegabyte, r});
    }
    for (std::int64_t x : s.model.sweep_grid) {
      for (const OffloadPolicy& p : policies) {
        const StepBreakdown b = s.run(x, p);
        ++runs;
        const auto violations = validate_trace(b);
        if (!violations.empty()) v.require(false, name + " " + b.policy + ": " + violations[0]);
        const double bound =
            std::holds_alternative<Chunked>(p)
                ? s.hw.t_dma + std::min<double>(std::get<Chunked>(p).chunk_bytes, layer) /
                                   (s.hw.eta_pref * s.hw.bw_h2d)
                : s.hw.t_dma + layer / (s.hw.eta_pref * s.hw.bw_h2d);
        for (const TraceEvent& e : b.trace) {
          if (e.category != EventCategory::kContentionStall) continue;
          ++stalls;
          if (to_seconds(e.duration()) > bound + 1e-12) {
            v.require(false, name + " " + b.policy + " stall " + num(to_seconds(e.duration())));
          }
        }
      }
    }
  }
  v.note(std::to_string(runs) + " runs, " + std::to_string(stalls) + " queued collectives");
  return v;
}

Verdict c8() {
  Verdict v;
  for (const std::string& name : kModels) {
    const Setup s = setup(name);
    const std::int64_t x = s.model.sweep_grid[1];
    const std::int64_t b = prefetch_bytes(s.model);
    const auto layers = static_cast<std::int64_t>(block_sequence(s.model).size());
    for (double r : {0.0, 0.4}) {
      for (std::int64_t mb : {4, 16, 64, 256}) {
        const StepBreakdown out = s.run(x, Chunked{mb * kMegabyte, r});
        // Independent chunk count and round-half-up residency.
        const std::int64_t C = std::min(mb * kMegabyte, b);
        const std::int64_t n = (b + C - 1) / C;
        const auto k = static_cast<std::int64_t>(std::floor(r * n + 0.5));
        const std::int64_t resident = k >= n ? b : k * C;
        v.require(out.total_h2d_bytes == layers * (b - resident),
                  name + " conservation at C=" + std::to_string(mb) + "MB r=" + num(r));
        if (r == 0.0) v.require(out.total_h2d_bytes == layers * b, name + " r=0 volume");
      }
    }
    const StepBreakdown none = s.run(x, NoOffload{});
    for (std::int64_t mb : {4, 16, 256}) {
      const StepBreakdown full = s.run(x, Chunked{mb * kMegabyte, 1.0});
      v.require(full.step_time == none.step_time && full.compute == none.compute &&
                    full.collective == none.collective && full.trace.size() == none.trace.size(),
                name + " r=1 not identical to NoOffload");
    }
    ScheduleOptions off;
    off.pause_enabled = false;
    const StepBreakdown whole = s.run(x, WholeLayer{}, off);
    const StepBreakdown one = s.run(x, Chunked{b, 0.0}, off);
    const double gap = std::abs(one.step_time_s() - whole.step_time_s());
    v.require(gap <= s.hw.t_dma * static_cast<double>(layers), name + " degeneracy gap " + num(gap));
  }
  v.note("3 models, C in {4,16,64,256} MB");
  return v;
}

Verdict c9() {
  Verdict v;
  const Setup s = setup("wanvideo");
  const std::int64_t sizes[] = {4, 16, 64, 256};
  std::vector<double> t;
  for (std::int64_t mb : sizes) t.push_back(s.run(81, Chunked{mb * kMegabyte, 0.0}).step_time_s());
  const auto best = std::min_element(t.begin(), t.end()) - t.begin();
  v.require(sizes[best] == 16, "minimum at " + std::to_string(sizes[best]) + " MB");
  bool monotone = true;
  for (long i = 1; i <= best; ++i) monotone &= t[i] <= t[i - 1];
  for (std::size_t i = best + 1; i < t.size(); ++i) monotone &= t[i] >= t[i - 1];
  v.require(monotone, "not monotone on each side of the minimum");
  std::string series;
  for (std::size_t i = 0; i < t.size(); ++i) {
    series += (i ? ", " : "") + std::to_string(sizes[i]) + "MB " + num(t[i]);
  }
  v.note(series);
  return v;
}

Verdict c10() {
  Verdict v;
  const double rs[] = {0.0, 0.2, 0.4, 0.6, 1.0};
  for (const std::string& name : kModels) {
    const Setup s = setup(name);
    const std::int64_t x = s.model.sweep_grid.front();
    StepBreakdown prev;
    double at_06 = 0;
    for (double r : rs) {
      const StepBreakdown b = s.run(x, Chunked{16 * kMegabyte, r});
      if (r > 0.0) {
        v.require(b.step_time <= prev.step_time, name + " step time rises at r=" + num(r));
        v.require(b.peak_param_bytes >= prev.peak_param_bytes, name + " memory falls at r=" + num(r));
      }
      if (r == 0.6) at_06 = b.step_time_s();
      prev = b;
    }
    const double none = s.run(x, NoOffload{}).step_time_s();
    v.require(at_06 <= 1.05 * none, name + " r=0.6 at " + num(at_06 / none) + "x NoOffload");
    // Independent closed form: the smallest r with (1-r) b_pref moved in one
    // block's compute window.
    const double window = flops_block_avg(s.model, s.at(x).batch, s.at(x).seq_len) /
                          s.hw.gpu_count / (s.hw.eta_comp * s.hw.p_peak);
    const double oracle =
        std::max(0.0, 1 - window * s.hw.eta_pref * s.hw.bw_h2d / *s.model.b_pref);
    const double r_min = min_residency(s.model, s.at(x), s.hw);
    v.require(std::abs(r_min - oracle) < 1e-9, name + " min_residency disagrees with oracle");
    v.require(r_min <= 0.70, name + " min_residency above 0.70");
    v.note(name + " min_residency " + num(r_min, 3));
  }
  return v;
}

Verdict c11() {
  Verdict v;
  double worst = 0;
  for (const std::string& name : kModels) {
    const Setup s = setup(name);
    SweepSpec spec;
    spec.model = name;
    spec.variable = natural_sweep_variable(s.model);
    spec.values = s.model.sweep_grid;
    for (const LabeledRun& run : cmd_sweep(builtin_config(), spec).runs) {
      const double share = run.breakdown.overhead_s() / run.breakdown.step_time_s();
      worst = std::max(worst, share);
      v.require(share <= 0.02, run.label + " overhead " + num(share));
    }
  }
  v.note("max overhead share " + num(worst, 3));
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"C1 critical configurations", c1},
      {"C2 F* and I* oracle", c2},
      {"C3 FLOP oracle", c3},
      {"C4 whole-layer slowdown at calibrated collectives", c4},
      {"C5 policy ordering and small-config speedup", c5},
      {"C6 chunked near no-offload past the crossing", c6},
      {"C7 contention bound on every trace", c7},
      {"C8 conservation, identity, degeneracy", c8},
      {"C9 chunk-size minimum at 16 MB", c9},
      {"C10 residency trade-off", c10},
      {"C11 overhead within 2%", c11},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    failed += v.pass ? 0 : 1;
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
  }
  std::printf(
      "SKIP C12 absolute step times and memory: declared not reproducible; covered by C5-C11\n");
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
