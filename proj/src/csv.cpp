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

#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace selgate::csv {

namespace {

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double ParseCell(std::string_view field, std::size_t line_no, std::string_view column) {
  if (field.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto v = ParseDouble(field);
  if (!v || std::isnan(*v)) {
    ThrowData("sweep csv line " + std::to_string(line_no) + ": bad " + std::string(column) +
              " '" + std::string(field) + "'");
  }
  return *v;
}

}  // namespace

std::string Cell(double value) { return std::isnan(value) ? std::string() : FormatDouble(value); }

std::string WriteSweep(const std::vector<metrics::SweepPoint>& points) {
  std::string out(kSweepHeader);
  out += '\n';
  for (const auto& p : points) {
    out += Cell(p.epsilon) + ',' + Cell(p.risk) + ',' + Cell(p.coverage) + ',' +
           Cell(p.abstention) + ',' + Cell(p.acc_cond) + ',' + Cell(p.ece) + ',' +
           std::to_string(p.n_accepted) + '\n';
  }
  return out;
}

std::vector<metrics::SweepPoint> ParseSweep(std::string_view text) {
  std::vector<metrics::SweepPoint> points;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header = false;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header) {
      if (line != kSweepHeader) ThrowData("sweep csv: unexpected header '" + std::string(line) + "'");
      header = true;
      continue;
    }
    if (line.empty()) continue;
    const auto f = SplitFields(line);
    if (f.size() != 7) ThrowData("sweep csv line " + std::to_string(line_no) + ": expected 7 fields");
    metrics::SweepPoint p;
    p.epsilon = ParseCell(f[0], line_no, "epsilon");
    p.risk = ParseCell(f[1], line_no, "risk");
    p.coverage = ParseCell(f[2], line_no, "coverage");
    p.abstention = ParseCell(f[3], line_no, "abstention");
    p.acc_cond = ParseCell(f[4], line_no, "acc_cond");
    p.ece = ParseCell(f[5], line_no, "ece");
    long n = 0;
    const auto r = std::from_chars(f[6].data(), f[6].data() + f[6].size(), n);
    if (r.ec != std::errc() || r.ptr != f[6].data() + f[6].size() || n < 0) {
      ThrowData("sweep csv line " + std::to_string(line_no) + ": bad n_accepted");
    }
    p.n_accepted = n;
    if (std::isnan(p.epsilon) || std::isnan(p.coverage) || std::isnan(p.abstention)) {
      ThrowData("sweep csv line " + std::to_string(line_no) + ": epsilon/coverage/abstention must be present");
    }
    points.push_back(p);
  }
  if (!header) ThrowData("sweep csv: missing header");
  return points;
}

std::vector<metrics::SweepPoint> LoadSweep(const std::filesystem::path& path) {
  return ParseSweep(ReadFile(path));
}

std::string WriteGroupTable(const std::vector<metrics::GroupRow>& rows) {
  std::string out = "group,epsilon,n,n_accepted,coverage,acc_cond\n";
  for (const auto& r : rows) {
    out += std::string(corpus::GroupName(r.group)) + ',' + Cell(r.epsilon) + ',' +
           std::to_string(r.n) + ',' + std::to_string(r.n_accepted) + ',' + Cell(r.coverage) +
           ',' + Cell(r.acc_cond) + '\n';
  }
  return out;
}

std::string WriteReliability(const metrics::Reliability& rel) {
  std::string out = "bin,lo,hi,count,mean_confidence,accuracy\n";
  for (int b = 0; b < metrics::kNumBins; ++b) {
    const auto& bin = rel.bins[b];
    out += std::to_string(b) + ',' + Cell(b / 10.0) + ',' + Cell((b + 1) / 10.0) + ',' +
           std::to_string(bin.count) + ',' + Cell(bin.mean_confidence) + ',' + Cell(bin.accuracy) + '\n';
  }
  return out;
}

}  // namespace selgate::csv
