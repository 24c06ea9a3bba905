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

#include "plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace selgate::plot {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 60;
constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#d62728", "#2ca02c",
                                                "#9467bd", "#ff7f0e", "#8c564b"};

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string Escape(std::string_view s) {
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

struct Frame {
  Axes axes;
  double px(double x) const {
    return kLeft + (x - axes.x_min) / (axes.x_max - axes.x_min) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kHeight - kBottom - (y - axes.y_min) / (axes.y_max - axes.y_min) * (kHeight - kTop - kBottom);
  }
};

std::string Header(const Frame& f) {
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Num(kWidth) + "\" height=\"" +
       Num(kHeight) + "\" viewBox=\"0 0 " + Num(kWidth) + " " + Num(kHeight) + "\">\n";
  s += "<metadata>" + std::string(kRendererVersion) + "</metadata>\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + Num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
       Escape(f.axes.title) + "</text>\n";
  // axes box and ticks
  s += "<rect x=\"" + Num(kLeft) + "\" y=\"" + Num(kTop) + "\" width=\"" + Num(kWidth - kLeft - kRight) +
       "\" height=\"" + Num(kHeight - kTop - kBottom) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = f.axes.x_min + (f.axes.x_max - f.axes.x_min) * i / 5.0;
    const double yv = f.axes.y_min + (f.axes.y_max - f.axes.y_min) * i / 5.0;
    s += "<text x=\"" + Num(f.px(xv)) + "\" y=\"" + Num(kHeight - kBottom + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + Num(xv) + "</text>\n";
    s += "<text x=\"" + Num(kLeft - 8) + "\" y=\"" + Num(f.py(yv) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + Num(yv) + "</text>\n";
    s += "<line x1=\"" + Num(kLeft) + "\" y1=\"" + Num(f.py(yv)) + "\" x2=\"" + Num(kWidth - kRight) +
         "\" y2=\"" + Num(f.py(yv)) + "\" stroke=\"#dddddd\"/>\n";
  }
  s += "<text x=\"" + Num((kLeft + kWidth - kRight) / 2) + "\" y=\"" + Num(kHeight - 18) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + Escape(f.axes.x_label) + "</text>\n";
  s += "<text x=\"18\" y=\"" + Num((kTop + kHeight - kBottom) / 2) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 " +
       Num((kTop + kHeight - kBottom) / 2) + ")\">" + Escape(f.axes.y_label) + "</text>\n";
  return s;
}

std::string Legend(const std::vector<std::string>& labels) {
  std::string s;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = kTop + 14 + 18.0 * static_cast<double>(i);
    const char* color = kColors[i % kColors.size()];
    s += "<line x1=\"" + Num(kWidth - kRight + 10) + "\" y1=\"" + Num(y) + "\" x2=\"" + Num(kWidth - kRight + 30) +
         "\" y2=\"" + Num(y) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + Num(kWidth - kRight + 35) + "\" y=\"" + Num(y + 4) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + Escape(labels[i]) + "</text>\n";
  }
  return s;
}

std::string Polylines(const Frame& f, const std::vector<std::pair<double, double>>& pts, const char* color) {
  std::string s, cur;
  int count = 0;
  const auto flush = [&] {
    if (count > 1) {
      s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + cur + "\"/>\n";
    } else if (count == 1) {
      s += "<circle r=\"2.5\" fill=\"" + std::string(color) + "\" cx=\"" + cur.substr(0, cur.find(',')) +
           "\" cy=\"" + cur.substr(cur.find(',') + 1) + "\"/>\n";
    }
    cur.clear();
    count = 0;
  };
  for (const auto& [x, y] : pts) {
    if (std::isnan(x) || std::isnan(y)) {
      flush();
      continue;
    }
    if (!cur.empty()) cur += ' ';
    cur += Num(f.px(x)) + "," + Num(f.py(y));
    ++count;
  }
  flush();
  return s;
}

}  // namespace

std::string LinePlot(const Axes& axes, const std::vector<Series>& series, const std::optional<Marker>& marker) {
  Frame f{axes};
  std::string s = Header(f);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < series.size(); ++i) {
    s += Polylines(f, series[i].points, kColors[i % kColors.size()]);
    labels.push_back(series[i].label);
  }
  if (marker) {
    const double x = f.px(marker->x);
    s += "<line x1=\"" + Num(x) + "\" y1=\"" + Num(kTop) + "\" x2=\"" + Num(x) + "\" y2=\"" + Num(kHeight - kBottom) +
         "\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";
    s += "<text x=\"" + Num(x + 4) + "\" y=\"" + Num(kTop + 12) + "\" font-family=\"sans-serif\" font-size=\"11\">" +
         Escape(marker->label) + "</text>\n";
  }
  s += Legend(labels);
  s += "</svg>\n";
  return s;
}

std::string RiskCoverage(const std::vector<NamedCurve>& curves, std::string_view title) {
  Axes axes{std::string(title), "coverage", "risk"};
  double ymax = 0.0;
  std::vector<Series> series;
  for (const auto& [name, pts] : curves) {
    Series s{name, {}};
    for (const auto& p : pts) {
      s.points.emplace_back(p.coverage, p.risk);
      if (!std::isnan(p.risk)) ymax = std::max(ymax, p.risk);
    }
    series.push_back(std::move(s));
  }
  axes.y_max = ymax > 0.0 ? std::min(1.0, std::ceil(ymax * 10.0) / 10.0) : 1.0;
  return LinePlot(axes, series);
}

std::string EceVsThreshold(const std::vector<NamedCurve>& curves, std::string_view title) {
  Axes axes{std::string(title), "threshold", "ECE"};
  double ymax = 0.0;
  std::vector<Series> series;
  for (const auto& [name, pts] : curves) {
    Series s{name, {}};
    for (const auto& p : pts) {
      s.points.emplace_back(p.epsilon, p.ece);
      if (!std::isnan(p.ece)) ymax = std::max(ymax, p.ece);
    }
    series.push_back(std::move(s));
  }
  axes.y_max = ymax > 0.0 ? std::min(1.0, std::ceil(ymax * 10.0) / 10.0) : 1.0;
  return LinePlot(axes, series);
}

std::string ReliabilityDiagram(const metrics::Reliability& rel, double epsilon, std::string_view title) {
  Axes axes{std::string(title) + " (threshold " + Num(epsilon) + ", ECE " +
                (std::isnan(rel.ece) ? std::string("n/a") : Num(rel.ece)) + ")",
            "confidence", "accuracy"};
  Frame f{axes};
  std::string s = Header(f);
  for (int b = 0; b < metrics::kNumBins; ++b) {
    const auto& bin = rel.bins[b];
    if (bin.count == 0) continue;
    const double x0 = f.px(b / 10.0) + 2, x1 = f.px((b + 1) / 10.0) - 2;
    const double y = f.py(bin.accuracy);
    s += "<rect x=\"" + Num(x0) + "\" y=\"" + Num(y) + "\" width=\"" + Num(x1 - x0) + "\" height=\"" +
         Num(f.py(0.0) - y) + "\" fill=\"" + kColors[0] + "\" fill-opacity=\"0.7\"/>\n";
    s += "<text x=\"" + Num((x0 + x1) / 2) + "\" y=\"" + Num(y - 4) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"9\">" + std::to_string(bin.count) + "</text>\n";
  }
  s += "<line x1=\"" + Num(f.px(0)) + "\" y1=\"" + Num(f.py(0)) + "\" x2=\"" + Num(f.px(1)) + "\" y2=\"" +
       Num(f.py(1)) + "\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";
  s += Legend({"accuracy per bin"});
  s += "</svg>\n";
  return s;
}

std::string CdfComparison(const std::vector<std::pair<std::string, std::vector<double>>>& samples,
                          double tau, std::string_view title) {
  Axes axes{std::string(title), "confidence", "cumulative fraction"};
  std::vector<Series> series;
  for (const auto& [name, values] : samples) {
    std::vector<double> v = values;
    std::sort(v.begin(), v.end());
    Series s{name + " (n=" + std::to_string(v.size()) + ")", {}};
    s.points.emplace_back(0.0, 0.0);
    const double n = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i + 1 < v.size() && v[i + 1] == v[i]) continue;  // one step per distinct value
      s.points.emplace_back(v[i], s.points.back().second);
      s.points.emplace_back(v[i], static_cast<double>(i + 1) / n);
    }
    s.points.emplace_back(1.0, v.empty() ? 0.0 : 1.0);
    series.push_back(std::move(s));
  }
  return LinePlot(axes, series, Marker{tau, "tau = " + Num(tau)});
}

}  // namespace selgate::plot
