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

#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace plateloop::svg {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#ff7f0e", "#9467bd", "#8c564b"};
constexpr int kPaletteSize = 6;

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string fmt_px(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // A flat or empty range still needs visible extent.
  void depad() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    } else if (lo == hi) {
      const double pad = (lo == 0.0) ? 1.0 : std::fabs(lo) * 0.1;
      lo -= pad;
      hi += pad;
    }
  }
};

}  // namespace

std::string render_chart(const ChartSpec& spec,
                         const std::vector<Series>& series) {
  if (series.empty()) {
    throw std::invalid_argument("render_chart: no series");
  }
  Range xr;
  Range yr;
  for (const Series& s : series) {
    for (const auto& [x, y] : s.points) {
      xr.include(x);
      yr.include(y);
    }
  }
  xr.depad();
  yr.depad();

  const double ml = 70.0;
  const double mr = 20.0;
  const double mt = 40.0;
  const double mb = 55.0;
  const double pw = spec.width - ml - mr;
  const double ph = spec.height - mt - mb;
  auto px = [&](double x) { return ml + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) {
    return mt + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
      << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width
      << " " << spec.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << spec.width / 2 << "\" y=\"24\" text-anchor=\"middle\""
      << " font-family=\"sans-serif\" font-size=\"16\">"
      << escape_xml(spec.title) << "</text>\n";

  // Gridlines and tick labels: 5 evenly spaced ticks per axis.
  const int ticks = 5;
  for (int i = 0; i < ticks; ++i) {
    const double tx = xr.lo + (xr.hi - xr.lo) * i / (ticks - 1);
    const double ty = yr.lo + (yr.hi - yr.lo) * i / (ticks - 1);
    out << "<line x1=\"" << fmt_px(px(tx)) << "\" y1=\"" << fmt_px(mt)
        << "\" x2=\"" << fmt_px(px(tx)) << "\" y2=\"" << fmt_px(mt + ph)
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<line x1=\"" << fmt_px(ml) << "\" y1=\"" << fmt_px(py(ty))
        << "\" x2=\"" << fmt_px(ml + pw) << "\" y2=\"" << fmt_px(py(ty))
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << fmt_px(px(tx)) << "\" y=\"" << fmt_px(mt + ph + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\""
        << " font-size=\"11\">" << fmt(tx) << "</text>\n";
    out << "<text x=\"" << fmt_px(ml - 6) << "\" y=\"" << fmt_px(py(ty) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\""
        << " font-size=\"11\">" << fmt(ty) << "</text>\n";
  }
  out << "<rect x=\"" << fmt_px(ml) << "\" y=\"" << fmt_px(mt) << "\" width=\""
      << fmt_px(pw) << "\" height=\"" << fmt_px(ph)
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  out << "<text x=\"" << spec.width / 2 << "\" y=\""
      << fmt_px(spec.height - 12) << "\" text-anchor=\"middle\""
      << " font-family=\"sans-serif\" font-size=\"13\">"
      << escape_xml(spec.x_label) << "</text>\n";
  out << "<text x=\"18\" y=\"" << fmt_px(mt + ph / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"13\" transform=\"rotate(-90 18 " << fmt_px(mt + ph / 2)
      << ")\">" << escape_xml(spec.y_label) << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    if (s.points.empty()) continue;
    const std::string color =
        s.color.empty() ? kPalette[si % kPaletteSize] : s.color;
    out << "<path fill=\"none\" stroke=\"" << escape_xml(color)
        << "\" stroke-width=\"1.5\" d=\"";
    bool first = true;
    double prev_y = 0.0;
    for (const auto& [x, y] : s.points) {
      if (first) {
        out << "M" << fmt_px(px(x)) << " " << fmt_px(py(y));
        first = false;
      } else if (s.step) {
        // Horizontal segment at the previous level, then the jump.
        out << " L" << fmt_px(px(x)) << " " << fmt_px(py(prev_y)) << " L"
            << fmt_px(px(x)) << " " << fmt_px(py(y));
      } else {
        out << " L" << fmt_px(px(x)) << " " << fmt_px(py(y));
      }
      prev_y = y;
    }
    out << "\"/>\n";
  }

  // Legend, top-right inside the plot area.
  double ly = mt + 14;
  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    const std::string color =
        s.color.empty() ? kPalette[si % kPaletteSize] : s.color;
    out << "<line x1=\"" << fmt_px(ml + pw - 150) << "\" y1=\"" << fmt_px(ly)
        << "\" x2=\"" << fmt_px(ml + pw - 126) << "\" y2=\"" << fmt_px(ly)
        << "\" stroke=\"" << escape_xml(color) << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fmt_px(ml + pw - 120) << "\" y=\"" << fmt_px(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape_xml(s.label) << "</text>\n";
    ly += 18;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace plateloop::svg
