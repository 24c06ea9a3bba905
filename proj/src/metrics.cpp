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

#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace selgate::metrics {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool IsCorrect(const gateway::Record& record, const corpus::AnswerKey& key) {
  const auto& item = key.At(record.question_id);
  return record.payload && record.payload->choice && *record.payload->choice == item.answer;
}

}  // namespace

std::string_view SignalName(Signal signal) {
  switch (signal) {
    case Signal::kAuto: return "auto";
    case Signal::kSelf: return "self";
    case Signal::kPmax: return "pmax";
  }
  return "?";
}

Signal ParseSignal(std::string_view name) {
  if (name == "auto") return Signal::kAuto;
  if (name == "self") return Signal::kSelf;
  if (name == "pmax") return Signal::kPmax;
  ThrowUsage("unknown confidence signal '" + std::string(name) + "' (auto, self, pmax)");
}

std::optional<double> ConfidenceOf(const gateway::Record& record, Signal signal) {
  if (signal == Signal::kAuto) {
    signal = record.mode == gateway::Mode::kLetter ? Signal::kPmax : Signal::kSelf;
  }
  if (signal == Signal::kPmax) {
    if (!record.option_distribution) return std::nullopt;
    return record.option_distribution->p_max;
  }
  if (!record.payload) return std::nullopt;
  return record.payload->confidence;
}

std::string_view GateReasonName(GateReason reason) {
  switch (reason) {
    case GateReason::kOk: return "ok";
    case GateReason::kParseFailure: return "parse_failure";
    case GateReason::kNullChoice: return "null_choice";
    case GateReason::kMissingConfidence: return "missing_confidence";
    case GateReason::kBelowThreshold: return "below_threshold";
  }
  return "?";
}

GateDecision Gate(const gateway::Record& record, double epsilon, Signal signal) {
  GateDecision d;
  d.question_id = record.question_id;
  if (!record.parse_ok || !record.payload) {
    d.reason = GateReason::kParseFailure;
  } else if (!record.payload->choice) {
    d.reason = GateReason::kNullChoice;
  } else if (const auto c = ConfidenceOf(record, signal); !c) {
    d.reason = GateReason::kMissingConfidence;
  } else if (*c < epsilon) {
    d.reason = GateReason::kBelowThreshold;
  } else {
    d.accepted = true;
  }
  return d;
}

int BinIndex(double confidence) {
  int b = static_cast<int>(confidence * kNumBins);
  b = std::clamp(b, 0, kNumBins - 1);
  // Compare against the same b/10.0 edges the bins are documented with.
  while (b + 1 < kNumBins && confidence >= (b + 1) / 10.0) ++b;
  while (b > 0 && confidence < b / 10.0) --b;
  return b;
}

Reliability Ece(const std::vector<Scored>& accepted) {
  Reliability r;
  std::array<double, kNumBins> conf_sum{};
  std::array<long, kNumBins> correct{};
  for (const auto& s : accepted) {
    const int b = BinIndex(s.confidence);
    ++r.bins[b].count;
    conf_sum[b] += s.confidence;
    correct[b] += s.correct ? 1 : 0;
  }
  r.n = static_cast<long>(accepted.size());
  if (r.n == 0) {
    r.ece = kNaN;
    for (auto& bin : r.bins) bin.mean_confidence = bin.accuracy = kNaN;
    return r;
  }
  double ece = 0.0;
  for (int b = 0; b < kNumBins; ++b) {
    auto& bin = r.bins[b];
    if (bin.count == 0) {
      bin.mean_confidence = bin.accuracy = kNaN;
      continue;
    }
    const double cnt = static_cast<double>(bin.count);
    bin.mean_confidence = conf_sum[b] / cnt;
    bin.accuracy = static_cast<double>(correct[b]) / cnt;
    ece += cnt / static_cast<double>(r.n) * std::fabs(bin.accuracy - bin.mean_confidence);
  }
  r.ece = ece;
  return r;
}

ScoredLog ScoreLog(const std::vector<gateway::Record>& records, const corpus::AnswerKey& key,
                   Signal signal) {
  if (records.empty()) ThrowData("predictions log is empty");
  ScoredLog log;
  log.total = records.size();
  for (const auto& rec : records) {
    const bool correct = IsCorrect(rec, key);  // also checks the id
    const auto d = Gate(rec, 0.0, signal);
    if (d.reason == GateReason::kOk || d.reason == GateReason::kBelowThreshold) {
      log.eligible.push_back({*ConfidenceOf(rec, signal), correct});
    }
  }
  return log;
}

std::vector<double> EvenGrid(int count) {
  if (count < 1) ThrowUsage("grid needs at least one point");
  if (count == 1) return {0.0};
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) g[i] = static_cast<double>(i) / (count - 1);
  return g;
}

std::vector<double> DefaultGrid() { return EvenGrid(25); }

void ValidateGrid(const std::vector<double>& grid) {
  if (grid.empty()) ThrowUsage("grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) ThrowUsage("grid value outside [0,1]: " + FormatDouble(grid[i]));
    if (i > 0 && grid[i] < grid[i - 1]) ThrowUsage("grid is not sorted");
  }
}

std::vector<SweepPoint> Sweep(const ScoredLog& log, const std::vector<double>& grid, long min_n) {
  ValidateGrid(grid);
  if (log.total == 0) ThrowData("predictions log is empty");

  std::vector<Scored> s = log.eligible;
  std::sort(s.begin(), s.end(), [](const Scored& a, const Scored& b) { return a.confidence < b.confidence; });
  const std::size_t n = s.size();

  // Suffix sums: wrong and correct counts over [i, n), confidence over [i, end of i's bin).
  std::vector<long> wrong(n + 1, 0), right(n + 1, 0);
  std::vector<double> conf(n + 1, 0.0);
  std::array<std::size_t, kNumBins> bin_end{};
  std::vector<int> bin(n);
  for (std::size_t i = 0; i < n; ++i) bin[i] = BinIndex(s[i].confidence);
  for (std::size_t i = n; i-- > 0;) {
    wrong[i] = wrong[i + 1] + (s[i].correct ? 0 : 1);
    right[i] = right[i + 1] + (s[i].correct ? 1 : 0);
    const bool same_bin = i + 1 < n && bin[i + 1] == bin[i];
    conf[i] = s[i].confidence + (same_bin ? conf[i + 1] : 0.0);
  }
  std::array<std::size_t, kNumBins> bin_start{};
  bin_start.fill(n);
  bin_end.fill(n);
  for (std::size_t i = n; i-- > 0;) bin_start[bin[i]] = i;
  for (std::size_t i = 0; i < n; ++i) bin_end[bin[i]] = i + 1;

  std::vector<SweepPoint> out;
  out.reserve(grid.size());
  const double total = static_cast<double>(log.total);
  for (double eps : grid) {
    const auto k = static_cast<std::size_t>(
        std::lower_bound(s.begin(), s.end(), eps,
                         [](const Scored& a, double e) { return a.confidence < e; }) - s.begin());
    SweepPoint p;
    p.epsilon = eps;
    p.n_accepted = static_cast<long>(n - k);
    p.coverage = static_cast<double>(p.n_accepted) / total;
    p.abstention = 1.0 - p.coverage;
    const bool defined = p.n_accepted > 0 && p.n_accepted >= min_n;
    if (!defined) {
      p.risk = p.acc_cond = p.ece = kNaN;
      out.push_back(p);
      continue;
    }
    const double acc = static_cast<double>(p.n_accepted);
    p.risk = static_cast<double>(wrong[k]) / acc;
    p.acc_cond = 1.0 - p.risk;
    double ece = 0.0;
    for (int b = 0; b < kNumBins; ++b) {
      if (bin_start[b] == n) continue;  // empty bin
      const std::size_t lo = std::max(bin_start[b], k);
      const std::size_t hi = bin_end[b];
      if (lo >= hi) continue;
      const double cnt = static_cast<double>(hi - lo);
      const double accuracy = static_cast<double>(right[lo] - right[hi]) / cnt;
      const double mean_conf = conf[lo] / cnt;
      ece += cnt / acc * std::fabs(accuracy - mean_conf);
    }
    p.ece = ece;
    out.push_back(p);
  }
  return out;
}

std::vector<SweepPoint> Sweep(const std::vector<gateway::Record>& records,
                              const corpus::AnswerKey& key, const std::vector<double>& grid,
                              const SweepOptions& options) {
  ValidateGrid(grid);
  if (options.min_n < 0) ThrowUsage("min-n must be >= 0");
  return Sweep(ScoreLog(records, key, options.signal), grid, options.min_n);
}

SweepPoint RiskCoverage(const std::vector<gateway::Record>& records, const corpus::AnswerKey& key,
                        double epsilon, const SweepOptions& options) {
  return Sweep(records, key, {epsilon}, options).front();
}

Reliability ReliabilityAt(const std::vector<gateway::Record>& records,
                          const corpus::AnswerKey& key, double epsilon, Signal signal) {
  std::vector<Scored> accepted;
  for (const auto& s : ScoreLog(records, key, signal).eligible) {
    if (s.confidence >= epsilon) accepted.push_back(s);
  }
  return Ece(accepted);
}

std::vector<GroupRow> PerGroupTable(const std::vector<gateway::Record>& records,
                                    const corpus::AnswerKey& key,
                                    const std::vector<double>& epsilons, Signal signal) {
  std::vector<GroupRow> rows;
  for (corpus::Group g : corpus::kAllGroups) {
    std::vector<gateway::Record> subset;
    for (const auto& r : records) {
      if (key.At(r.question_id).group() == g) subset.push_back(r);
    }
    for (double eps : epsilons) {
      GroupRow row;
      row.group = g;
      row.epsilon = eps;
      row.n = static_cast<long>(subset.size());
      long right = 0;
      for (const auto& r : subset) {
        if (Gate(r, eps, signal).accepted) {
          ++row.n_accepted;
          right += IsCorrect(r, key) ? 1 : 0;
        }
      }
      row.coverage = row.n ? static_cast<double>(row.n_accepted) / static_cast<double>(row.n) : kNaN;
      row.acc_cond = row.n_accepted ? static_cast<double>(right) / static_cast<double>(row.n_accepted) : kNaN;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace selgate::metrics
