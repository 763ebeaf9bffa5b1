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

#include "offload/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace offload::svg {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  if (v != 0.0 && (std::abs(v) >= 1e5 || std::abs(v) < 1e-2)) {
    std::snprintf(buf, sizeof buf, "%.2g", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.4g", v);
  }
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string header(const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
                  "\" height=\"" + std::to_string(kHeight) + "\" viewBox=\"0 0 " +
                  std::to_string(kWidth) + " " + std::to_string(kHeight) +
                  "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + std::to_string(kWidth / 2) +
       "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) + "</text>\n";
  return s;
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle",
                 double rotate = 0.0) {
  std::string t = "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\"";
  if (rotate != 0.0) t += " transform=\"rotate(" + num(rotate) + " " + num(x) + " " + num(y) + ")\"";
  return t + ">" + escape(s) + "</text>\n";
}

std::string line(double x1, double y1, double x2, double y2, const char* stroke,
                 const char* extra = "") {
  return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
         num(y2) + "\" stroke=\"" + stroke + "\"" + extra + "/>\n";
}

struct Scale {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;
  double pixel_lo = 0.0;
  double pixel_hi = 1.0;

  double operator()(double v) const {
    const double a = log ? std::log10(lo) : lo;
    const double b = log ? std::log10(hi) : hi;
    const double x = log ? std::log10(std::max(v, lo)) : v;
    return pixel_lo + (x - a) / (b - a) * (pixel_hi - pixel_lo);
  }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double e = std::floor(std::log10(lo)); e <= std::ceil(std::log10(hi)); e += 1.0) {
        const double v = std::pow(10.0, e);
        if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) out.push_back(v);
      }
      return out;
    }
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
      if (raw <= m * mag) {
        step = m * mag;
        break;
      }
    }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) out.push_back(v);
    return out;
  }
};

Scale fit(double lo, double hi, bool log, double p0, double p1) {
  if (!(lo <= hi)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (log) {
    lo = std::max(lo, std::numeric_limits<double>::min());
    if (hi <= lo) hi = lo * 10.0;
    lo = std::pow(10.0, std::floor(std::log10(lo)));
    hi = std::pow(10.0, std::ceil(std::log10(hi)));
    if (hi <= lo) hi = lo * 10.0;
  } else {
    const double pad = (hi - lo) * 0.05;
    if (hi == lo) {
      lo -= std::max(std::abs(lo) * 0.1, 1e-12);
      hi += std::max(std::abs(hi) * 0.1, 1e-12);
    } else {
      lo = lo >= 0 && lo - pad < 0 ? 0.0 : lo - pad;
      hi += pad;
    }
  }
  return {lo, hi, log, p0, p1};
}

std::string draw_panel(const Panel& panel, double left, double top, double width, double height) {
  std::string s;
  double xlo = std::numeric_limits<double>::infinity();
  double xhi = -xlo;
  double ylo = xlo;
  double yhi = -xlo;
  for (const Series& ser : panel.series) {
    for (const auto& [x, y] : ser.points) {
      if (panel.x.log_scale && x <= 0) continue;
      if (panel.y.log_scale && y <= 0) continue;
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  }
  for (const auto& [x, _] : panel.markers) {
    xlo = std::min(xlo, x);
    xhi = std::max(xhi, x);
  }
  if (!std::isfinite(xlo)) {
    xlo = 0.0;
    xhi = 1.0;
    ylo = 0.0;
    yhi = 1.0;
  }
  const double plot_left = left + 60;
  const double plot_right = left + width - 25;
  const double plot_top = top + 30;
  const double plot_bottom = top + height - 45;
  const Scale sx = fit(xlo, xhi, panel.x.log_scale, plot_left, plot_right);
  const Scale sy = fit(panel.y.log_scale ? ylo : std::min(0.0, ylo), yhi, panel.y.log_scale,
                       plot_bottom, plot_top);

  s += text((plot_left + plot_right) / 2, top + 18, panel.title);
  s += "<rect x=\"" + num(plot_left) + "\" y=\"" + num(plot_top) + "\" width=\"" +
       num(plot_right - plot_left) + "\" height=\"" + num(plot_bottom - plot_top) +
       "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (double t : sx.ticks()) {
    s += line(sx(t), plot_bottom, sx(t), plot_bottom + 4, "#444");
    s += text(sx(t), plot_bottom + 16, tick_label(t));
  }
  for (double t : sy.ticks()) {
    s += line(plot_left - 4, sy(t), plot_left, sy(t), "#444");
    s += line(plot_left, sy(t), plot_right, sy(t), "#eee");
    s += text(plot_left - 6, sy(t) + 4, tick_label(t), "end");
  }
  s += text((plot_left + plot_right) / 2, plot_bottom + 34, panel.x.label);
  s += text(left + 14, (plot_top + plot_bottom) / 2, panel.y.label, "middle", -90);

  for (const auto& [x, label] : panel.markers) {
    s += line(sx(x), plot_top, sx(x), plot_bottom, "#999", " stroke-dasharray=\"4 3\"");
    s += text(sx(x) + 3, plot_top + 12, label, "start");
  }
  for (std::size_t i = 0; i < panel.series.size(); ++i) {
    const Series& ser = panel.series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    std::string pts;
    for (const auto& [x, y] : ser.points) {
      if ((panel.x.log_scale && x <= 0) || (panel.y.log_scale && y <= 0)) continue;
      pts += num(sx(x)) + "," + num(sy(y)) + " ";
      if (ser.draw_points) {
        s += "<circle cx=\"" + num(sx(x)) + "\" cy=\"" + num(sy(y)) + "\" r=\"3\" fill=\"" +
             color + "\"/>\n";
      }
    }
    if (ser.draw_line) {
      s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\"" +
           (ser.dashed ? " stroke-dasharray=\"6 4\"" : "") + " points=\"" + pts + "\"/>\n";
    }
  }

  // Legend in the top-left corner over a translucent backing.
  std::size_t longest = 0;
  for (const Series& ser : panel.series) longest = std::max(longest, ser.name.size());
  if (!panel.series.empty()) {
    const double lx = plot_left + 8;
    s += "<rect x=\"" + num(lx - 4) + "\" y=\"" + num(plot_top + 4) + "\" width=\"" +
         num(34 + 6.5 * static_cast<double>(longest)) + "\" height=\"" +
         num(14 * static_cast<double>(panel.series.size()) + 6) +
         "\" fill=\"white\" fill-opacity=\"0.85\" stroke=\"#ccc\"/>\n";
  }
  for (std::size_t i = 0; i < panel.series.size(); ++i) {
    const Series& ser = panel.series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    const double lx = plot_left + 8;
    const double ly = plot_top + 18 + 14 * static_cast<double>(i);
    if (ser.draw_line) {
      s += line(lx, ly - 4, lx + 20, ly - 4, color,
                ser.dashed ? " stroke-width=\"2\" stroke-dasharray=\"6 4\"" : " stroke-width=\"2\"");
    } else {
      s += "<circle cx=\"" + num(lx + 10) + "\" cy=\"" + num(ly - 4) + "\" r=\"3\" fill=\"" +
           color + "\"/>\n";
    }
    s += text(lx + 24, ly, ser.name, "start");
  }
  return s;
}

}  // namespace

std::string line_chart(const std::string& title, const std::vector<Panel>& panels) {
  std::string s = header(title);
  const double width = static_cast<double>(kWidth) / std::max<std::size_t>(panels.size(), 1);
  for (std::size_t i = 0; i < panels.size(); ++i) {
    s += draw_panel(panels[i], width * static_cast<double>(i), 24, width, kHeight - 24);
  }
  return s + "</svg>\n";
}

std::string stacked_bars(const std::string& title, const std::string& y_label,
                         const std::vector<std::string>& segment_names,
                         const std::vector<BarStack>& bars,
                         const std::string& reference_label) {
  std::string s = header(title);
  const double plot_left = 70;
  const double plot_right = kWidth - 210;
  const double plot_top = 50;
  const double plot_bottom = kHeight - 50;
  double ymax = 0.0;
  for (const BarStack& b : bars) {
    double total = 0.0;
    for (double v : b.values) total += v;
    ymax = std::max({ymax, total, b.reference});
  }
  const Scale sy = fit(0.0, ymax > 0 ? ymax : 1.0, false, plot_bottom, plot_top);
  s += "<rect x=\"" + num(plot_left) + "\" y=\"" + num(plot_top) + "\" width=\"" +
       num(plot_right - plot_left) + "\" height=\"" + num(plot_bottom - plot_top) +
       "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (double t : sy.ticks()) {
    s += line(plot_left, sy(t), plot_right, sy(t), "#eee");
    s += text(plot_left - 6, sy(t) + 4, tick_label(t), "end");
  }
  s += text(18, (plot_top + plot_bottom) / 2, y_label, "middle", -90);

  const double slot = (plot_right - plot_left) / std::max<std::size_t>(bars.size(), 1);
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const BarStack& b = bars[i];
    const double x = plot_left + slot * (static_cast<double>(i) + 0.2);
    const double w = slot * 0.6;
    double base = 0.0;
    for (std::size_t k = 0; k < b.values.size(); ++k) {
      const double y0 = sy(base);
      const double y1 = sy(base + b.values[k]);
      s += "<rect x=\"" + num(x) + "\" y=\"" + num(y1) + "\" width=\"" + num(w) +
           "\" height=\"" + num(std::max(0.0, y0 - y1)) + "\" fill=\"" +
           kPalette[k % std::size(kPalette)] + "\"/>\n";
      base += b.values[k];
    }
    if (b.reference >= 0) {
      s += line(x - 4, sy(b.reference), x + w + 4, sy(b.reference), "#d62728",
                " stroke-width=\"2\" stroke-dasharray=\"5 3\"");
    }
    s += text(x + w / 2, plot_bottom + 16, b.label);
  }
  for (std::size_t k = 0; k < segment_names.size(); ++k) {
    const double ly = plot_top + 14 + 16 * static_cast<double>(k);
    s += "<rect x=\"" + num(plot_right + 12) + "\" y=\"" + num(ly - 9) +
         "\" width=\"12\" height=\"10\" fill=\"" + kPalette[k % std::size(kPalette)] + "\"/>\n";
    s += text(plot_right + 30, ly, segment_names[k], "start");
  }
  if (!reference_label.empty()) {
    const double ly = plot_top + 14 + 16 * static_cast<double>(segment_names.size());
    s += line(plot_right + 10, ly - 4, plot_right + 26, ly - 4, "#d62728",
              " stroke-width=\"2\" stroke-dasharray=\"5 3\"");
    s += text(plot_right + 30, ly, reference_label, "start");
  }
  return s + "</svg>\n";
}

}  // namespace offload::svg
