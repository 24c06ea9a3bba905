// Copyright 2026 The Selgate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Static SVG plots. Output depends only on the inputs and kRendererVersion,
// which is written into each file's <metadata>.

#ifndef SELGATE_PLOT_HPP_
#define SELGATE_PLOT_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "metrics.hpp"

namespace selgate::plot {

inline constexpr std::string_view kRendererVersion = "selgate-svg 1";

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;  // NaN y breaks the line
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
};

struct Marker {
  double x = 0.0;
  std::string label;
};

std::string LinePlot(const Axes& axes, const std::vector<Series>& series,
                     const std::optional<Marker>& marker = std::nullopt);

using NamedCurve = std::pair<std::string, std::vector<metrics::SweepPoint>>;

// Risk against coverage, one line per curve.
std::string RiskCoverage(const std::vector<NamedCurve>& curves, std::string_view title);
std::string EceVsThreshold(const std::vector<NamedCurve>& curves, std::string_view title);
// Per-bin accuracy bars against the identity line.
std::string ReliabilityDiagram(const metrics::Reliability& reliability, double epsilon,
                               std::string_view title);
// Empirical CDFs with a vertical marker at tau.
std::string CdfComparison(const std::vector<std::pair<std::string, std::vector<double>>>& samples,
                          double tau, std::string_view title);

}  // namespace selgate::plot

#endif  // SELGATE_PLOT_HPP_
