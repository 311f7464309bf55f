// Copyright 2026 plateloop authors.
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

namespace plateloop::svg {

struct Series {
  std::string label;
  std::string color;  // CSS color; empty picks from the default palette
  bool step = false;  // render as a right-continuous step function
  std::vector<std::pair<double, double>> points;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 960;
  int height = 540;
};

/// Self-contained SVG line chart: axes with 5 tick labels per dimension,
/// light gridlines, one polyline (or step path) per series, and a legend.
/// Degenerate value ranges are padded so the data stays visible.
std::string render_chart(const ChartSpec& spec,
                         const std::vector<Series>& series);

}  // namespace plateloop::svg
