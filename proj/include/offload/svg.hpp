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

#include <string>
#include <utility>
#include <vector>

namespace offload::svg {

// Fixed canvas; every chart in this project renders at this size.
inline constexpr int kWidth = 800;
inline constexpr int kHeight = 500;

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
  bool dashed = false;
  bool draw_line = true;
  bool draw_points = true;
};

struct Axis {
  std::string label;
  bool log_scale = false;
};

struct Panel {
  std::string title;
  Axis x;
  Axis y;
  std::vector<Series> series;
  // Vertical reference lines, e.g. a ridge point.
  std::vector<std::pair<double, std::string>> markers;
};

// One or more line-chart panels laid out side by side.
std::string line_chart(const std::string& title, const std::vector<Panel>& panels);

struct BarStack {
  std::string label;
  std::vector<double> values;  // one per segment name
  // Optional reference value drawn as a dashed tick above the bar.
  double reference = -1.0;
};

// `reference_label` names the dashed reference tick in the legend.
std::string stacked_bars(const std::string& title, const std::string& y_label,
                         const std::vector<std::string>& segment_names,
                         const std::vector<BarStack>& bars,
                         const std::string& reference_label = "");

}  // namespace offload::svg
