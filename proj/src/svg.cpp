// Copyright 2026 The DriftArena Authors.
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

#include "driftarena/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "driftarena/common.hpp"

namespace driftarena::svg {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
constexpr int kLeft = 70, kRight = 160, kTop = 40, kBottom = 50;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range padded(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) return {};
  if (lo == hi) return {lo - 1.0, hi + 1.0};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::string header(int width, int height, const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
                  std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) + " " +
                  std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + std::to_string(width / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
       escape(title) + "</text>\n";
  return s;
}

std::string axes(int width, int height, Range y, const std::string& y_label) {
  const int pw = width - kLeft - kRight;
  const int ph = height - kTop - kBottom;
  std::string s;
  s += "<rect x=\"" + std::to_string(kLeft) + "\" y=\"" + std::to_string(kTop) + "\" width=\"" +
       std::to_string(pw) + "\" height=\"" + std::to_string(ph) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = y.lo + (y.hi - y.lo) * i / 4.0;
    const double py = kTop + ph - ph * i / 4.0;
    s += "<line x1=\"" + std::to_string(kLeft) + "\" x2=\"" + std::to_string(kLeft + pw) + "\" y1=\"" + num(py) +
         "\" y2=\"" + num(py) + "\" stroke=\"#ddd\"/>\n";
    s += "<text x=\"" + std::to_string(kLeft - 6) + "\" y=\"" + num(py + 4) + "\" text-anchor=\"end\">" + tick(v) +
         "</text>\n";
  }
  s += "<text transform=\"translate(16," + std::to_string(kTop + ph / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
  return s;
}

std::string legend(int width, const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const int y = kTop + 10 + static_cast<int>(i) * 18;
    const int x = width - kRight + 14;
    s += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y - 9) + "\" width=\"12\" height=\"12\" fill=\"" +
         kPalette[i % 6] + "\"/>\n";
    s += "<text x=\"" + std::to_string(x + 18) + "\" y=\"" + std::to_string(y + 1) + "\">" + escape(names[i]) +
         "</text>\n";
  }
  return s;
}

}  // namespace

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series, int width, int height) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  const Range xr = std::isfinite(xlo) ? Range{xlo, xhi == xlo ? xlo + 1.0 : xhi} : Range{};
  const Range yr = padded(ylo, yhi);
  const int pw = width - kLeft - kRight;
  const int ph = height - kTop - kBottom;
  auto px = [&](double x) { return kLeft + pw * (x - xr.lo) / (xr.hi - xr.lo); };
  auto py = [&](double y) { return kTop + ph - ph * (y - yr.lo) / (yr.hi - yr.lo); };

  std::string s = header(width, height, title) + axes(width, height, yr, y_label);
  for (int i = 0; i <= 4; ++i) {
    const double v = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    s += "<text x=\"" + num(px(v)) + "\" y=\"" + std::to_string(kTop + ph + 16) + "\" text-anchor=\"middle\">" +
         tick(v) + "</text>\n";
  }
  s += "<text x=\"" + std::to_string(kLeft + pw / 2) + "\" y=\"" + std::to_string(height - 10) +
       "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
  std::vector<std::string> names;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& ser = series[k];
    names.push_back(ser.name);
    std::string pts;
    for (std::size_t i = 0; i < std::min(ser.x.size(), ser.y.size()); ++i) {
      if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) continue;
      if (!pts.empty()) pts += ' ';
      pts += num(px(ser.x[i])) + "," + num(py(ser.y[i]));
    }
    s += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" + std::string(kPalette[k % 6]) + "\" points=\"" +
         pts + "\"/>\n";
  }
  s += legend(width, names);
  s += "</svg>\n";
  return s;
}

std::string bar_chart(const std::string& title, const std::string& y_label,
                      const std::vector<std::string>& series_names, const std::vector<BarGroup>& groups,
                      int width, int height) {
  double lo = 0.0, hi = 0.0;
  for (const auto& g : groups) {
    for (double v : g.values) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  Range yr = padded(lo, hi);
  if (lo == 0.0) yr.lo = 0.0;
  const int pw = width - kLeft - kRight;
  const int ph = height - kTop - kBottom;
  auto py = [&](double y) { return kTop + ph - ph * (y - yr.lo) / (yr.hi - yr.lo); };

  std::string s = header(width, height, title) + axes(width, height, yr, y_label);
  const double group_w = groups.empty() ? pw : static_cast<double>(pw) / static_cast<double>(groups.size());
  const std::size_t n_series = std::max<std::size_t>(1, series_names.size());
  const double bar_w = group_w * 0.8 / static_cast<double>(n_series);
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const double gx = kLeft + group_w * static_cast<double>(gi);
    for (std::size_t k = 0; k < groups[gi].values.size(); ++k) {
      const double v = groups[gi].values[k];
      if (!std::isfinite(v)) continue;
      const double top = py(std::max(v, 0.0));
      const double bottom = py(std::min(v, 0.0));
      s += "<rect x=\"" + num(gx + group_w * 0.1 + bar_w * static_cast<double>(k)) + "\" y=\"" + num(top) +
           "\" width=\"" + num(bar_w) + "\" height=\"" + num(bottom - top) + "\" fill=\"" + kPalette[k % 6] +
           "\"/>\n";
    }
    s += "<text x=\"" + num(gx + group_w / 2) + "\" y=\"" + std::to_string(kTop + ph + 16) +
         "\" text-anchor=\"middle\">" + escape(groups[gi].label) + "</text>\n";
  }
  if (yr.lo < 0.0) {
    s += "<line x1=\"" + std::to_string(kLeft) + "\" x2=\"" + std::to_string(kLeft + pw) + "\" y1=\"" + num(py(0)) +
         "\" y2=\"" + num(py(0)) + "\" stroke=\"#444\"/>\n";
  }
  s += legend(width, series_names);
  s += "</svg>\n";
  return s;
}

void write(const std::filesystem::path& path, const std::string& svg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << svg;
  if (!out) throw ConfigError("failed writing " + path.string());
}

}  // namespace driftarena::svg
