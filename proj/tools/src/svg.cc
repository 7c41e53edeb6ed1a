// Copyright 2026 The DSRG Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dsrg_cli/svg.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace dsrg::cli {
namespace {

constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759",
                                    "#76b7b2", "#edc948", "#b07aa1", "#ff9da7"};

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string Header(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Num(w) + "\" height=\"" +
         Num(h) + "\" viewBox=\"0 0 " + Num(w) + " " + Num(h) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n";
}

std::string Rect(double x, double y, double w, double h, const std::string& fill,
                 const std::string& extra = "") {
  return "<rect x=\"" + Num(x) + "\" y=\"" + Num(y) + "\" width=\"" + Num(w) +
         "\" height=\"" + Num(h) + "\" fill=\"" + fill + "\"" + extra + "/>\n";
}

std::string Text(double x, double y, const std::string& s,
                 const std::string& extra = "") {
  return "<text x=\"" + Num(x) + "\" y=\"" + Num(y) + "\"" + extra + ">" + XmlEscape(s) +
         "</text>\n";
}

}  // namespace

std::string XmlEscape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

std::string DeltaBarChartSvg(const FairnessReport& report) {
  std::vector<std::string> professions;
  std::map<std::string, std::map<std::string, double>> delta;
  for (const ReportRow& r : report.rows) {
    if (delta.find(r.profession) == delta.end()) professions.push_back(r.profession);
    delta[r.profession][r.aspect] = r.delta;
  }
  const std::size_t n_aspects = std::max<std::size_t>(report.aspects.size(), 1);
  const double bar = 14.0, gap = 18.0, left = 50.0, top = 30.0, plot_h = 200.0;
  const double group = bar * static_cast<double>(n_aspects) + gap;
  const double width = left + group * static_cast<double>(professions.size()) + 120.0;
  const double height = top + plot_h + 80.0;

  std::string out = Header(width, height);
  out += Text(left, 18, "deviation ratio per profession", " font-size=\"13\"");
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = tick / 4.0;
    const double y = top + plot_h * (1.0 - v);
    out += "<line x1=\"" + Num(left) + "\" y1=\"" + Num(y) + "\" x2=\"" +
           Num(width - 120.0) + "\" y2=\"" + Num(y) + "\" stroke=\"#dddddd\"/>\n";
    out += Text(left - 30, y + 4, Num(v));
  }
  for (std::size_t p = 0; p < professions.size(); ++p) {
    const double x0 = left + gap / 2 + group * static_cast<double>(p);
    for (std::size_t k = 0; k < report.aspects.size(); ++k) {
      const auto& row = delta[professions[p]];
      const auto it = row.find(report.aspects[k].name);
      if (it == row.end()) continue;
      const double h = plot_h * std::clamp(it->second, 0.0, 1.0);
      out += Rect(x0 + bar * static_cast<double>(k), top + plot_h - h, bar - 1, h,
                  kPalette[k % std::size(kPalette)], " class=\"bar\"");
    }
    out +=
        Text(x0, top + plot_h + 14, professions[p],
             " transform=\"rotate(30 " + Num(x0) + " " + Num(top + plot_h + 14) + ")\"");
  }
  for (std::size_t k = 0; k < report.aspects.size(); ++k) {
    const double y = top + 16.0 * static_cast<double>(k);
    out += Rect(width - 110, y, 10, 10, kPalette[k % std::size(kPalette)]);
    out += Text(width - 95, y + 9, report.aspects[k].name);
  }
  out += "</svg>\n";
  return out;
}

std::string InterpolationGridSvg(const std::vector<std::vector<GridCell>>& cells,
                                 const std::string& label_a, const std::string& label_b) {
  const std::size_t k = cells.size();
  const double cell = 56.0, left = 70.0, top = 40.0;
  const double width = left + cell * static_cast<double>(k) + 20.0;
  const double height = top + cell * static_cast<double>(k) + 40.0;
  std::string out = Header(width, height);
  out += Text(left, 16, "rows: " + label_a + "   columns: " + label_b);
  for (std::size_t i = 0; i < k; ++i) {
    out += Text(8, top + cell * (static_cast<double>(i) + 0.55),
                "g=" + Num(cells[i].empty() ? 0.0 : cells[i][0].gamma_a));
    for (std::size_t j = 0; j < cells[i].size(); ++j) {
      const GridCell& c = cells[i][j];
      const int red =
          static_cast<int>(std::lround(255.0 * std::clamp(c.share_a, 0.0, 1.0)));
      const int blue =
          static_cast<int>(std::lround(255.0 * std::clamp(c.share_b, 0.0, 1.0)));
      char fill[16];
      std::snprintf(fill, sizeof fill, "#%02x%02x%02x", red, 64, blue);
      const double x = left + cell * static_cast<double>(j);
      const double y = top + cell * static_cast<double>(i);
      out += Rect(x, y, cell - 2, cell - 2, fill, " class=\"cell\"");
      out += Text(x + 4, y + 22, Num(c.share_a), " fill=\"white\"");
      out += Text(x + 4, y + 40, Num(c.share_b), " fill=\"white\"");
    }
  }
  for (std::size_t j = 0; j < (k ? cells[0].size() : 0); ++j) {
    out +=
        Text(left + cell * static_cast<double>(j) + 4,
             top + cell * static_cast<double>(k) + 16, "g=" + Num(cells[0][j].gamma_b));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace dsrg::cli
