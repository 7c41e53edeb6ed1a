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

#ifndef DSRG_CLI_SVG_H_
#define DSRG_CLI_SVG_H_

#include <string>
#include <vector>

#include "dsrg/eval.h"

namespace dsrg::cli {

// Grouped bar chart of delta per profession, one bar per covered aspect.
std::string DeltaBarChartSvg(const FairnessReport& report);

// One interpolation cell: the two directive gammas and the classified share
// of each target attribute over the cell's samples.
struct GridCell {
  double gamma_a = 0.0;
  double gamma_b = 0.0;
  double share_a = 0.0;
  double share_b = 0.0;
};

// k x k heat grid; cells[i][j] has gamma_a growing down the rows and gamma_b
// along the columns. Fill mixes share_a (red) and share_b (blue).
std::string InterpolationGridSvg(const std::vector<std::vector<GridCell>>& cells,
                                 const std::string& label_a, const std::string& label_b);

// Escapes &, <, >, " for SVG text and attributes.
std::string XmlEscape(const std::string& text);

}  // namespace dsrg::cli

#endif  // DSRG_CLI_SVG_H_
