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

#include "shift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace selgate::shift {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::unordered_map<std::string, std::size_t> IndexById(const std::vector<gateway::Record>& log,
                                                       std::string_view side) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (!index.emplace(log[i].question_id, i).second) {
      ThrowData("duplicate question_id '" + log[i].question_id + "' in log " + std::string(side));
    }
  }
  return index;
}

double Median(const double* v, std::size_t n) {
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

double Metric(const metrics::SweepPoint& p, Criterion c) {
  return c == Criterion::kFixedRisk ? p.risk : p.coverage;
}

double Lerp(double a, double b, double t) { return a + (b - a) * t; }

}  // namespace

bool IsValid(const gateway::Record& record, metrics::Signal signal) {
  return record.parse_ok && metrics::ConfidenceOf(record, signal).has_value();
}

std::vector<MatchedPair> MatchInstances(const std::vector<gateway::Record>& log_a,
                                        const std::vector<gateway::Record>& log_b,
                                        metrics::Signal signal) {
  IndexById(log_a, "A");
  const auto index_b = IndexById(log_b, "B");
  std::vector<MatchedPair> pairs;
  for (const auto& a : log_a) {
    const auto it = index_b.find(a.question_id);
    if (it == index_b.end()) continue;
    const auto& b = log_b[it->second];
    if (!IsValid(a, signal) || !IsValid(b, signal)) continue;
    pairs.push_back({a.question_id, a, b});
  }
  return pairs;
}

DistributionStats Describe(std::vector<double> values) {
  if (values.empty()) ThrowData("no values to describe");
  std::sort(values.begin(), values.end());
  DistributionStats s;
  s.n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  s.median = Median(values.data(), s.n);
  const std::size_t half = (s.n + 1) / 2;  // odd n: median lands in both halves
  s.q25 = Median(values.data(), half);
  s.q75 = Median(values.data() + (s.n - half), half);
  s.iqr = s.q75 - s.q25;
  return s;
}

HighConfMass HighConfidenceMass(const std::vector<gateway::Record>& records,
                                const corpus::AnswerKey& key, double tau,
                                metrics::Signal signal) {
  HighConfMass m;
  long wrong = 0;
  for (const auto& r : records) {
    if (!IsValid(r, signal)) continue;
    ++m.n;
    if (*metrics::ConfidenceOf(r, signal) < tau) continue;
    ++m.n_high;
    const auto& item = key.At(r.question_id);
    const bool correct = r.payload->choice && *r.payload->choice == item.answer;
    if (!correct) ++wrong;
  }
  m.mass = m.n ? static_cast<double>(m.n_high) / static_cast<double>(m.n) : kNaN;
  m.error_rate = m.n_high ? static_cast<double>(wrong) / static_cast<double>(m.n_high) : kNaN;
  return m;
}

DeltaSummary Delta(const std::vector<MatchedPair>& pairs, metrics::Signal signal) {
  if (pairs.empty()) ThrowData("no matched pairs");
  DeltaSummary d;
  d.n = pairs.size();
  double sa = 0.0, sb = 0.0;
  for (const auto& p : pairs) {
    sa += *metrics::ConfidenceOf(p.a, signal);
    sb += *metrics::ConfidenceOf(p.b, signal);
  }
  d.mean_a = sa / static_cast<double>(d.n);
  d.mean_b = sb / static_cast<double>(d.n);
  d.delta_abs = d.mean_b - d.mean_a;
  d.delta_rel = d.delta_abs / d.mean_a;
  return d;
}

std::string_view CriterionName(Criterion c) {
  return c == Criterion::kFixedRisk ? "fixed_risk" : "fixed_coverage";
}

CurveValue Interpolate(const std::vector<metrics::SweepPoint>& curve, double epsilon) {
  if (curve.empty()) ThrowData("empty curve");
  if (epsilon < curve.front().epsilon || epsilon > curve.back().epsilon) {
    ThrowData("epsilon " + FormatDouble(epsilon) + " outside curve range [" +
              FormatDouble(curve.front().epsilon) + ", " + FormatDouble(curve.back().epsilon) + "]");
  }
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i].epsilon == epsilon) {
      return {curve[i].risk, curve[i].coverage, static_cast<double>(curve[i].n_accepted)};
    }
  }
  std::size_t j = 0;
  while (j + 1 < curve.size() && !(curve[j].epsilon <= epsilon && epsilon <= curve[j + 1].epsilon)) ++j;
  const auto& lo = curve[j];
  const auto& hi = curve[j + 1];
  const double t = (epsilon - lo.epsilon) / (hi.epsilon - lo.epsilon);
  CurveValue v;
  v.risk = std::isnan(lo.risk) || std::isnan(hi.risk) ? kNaN : Lerp(lo.risk, hi.risk, t);
  v.coverage = Lerp(lo.coverage, hi.coverage, t);
  v.n = Lerp(static_cast<double>(lo.n_accepted), static_cast<double>(hi.n_accepted), t);
  return v;
}

TransferResult ThresholdTransfer(const std::vector<metrics::SweepPoint>& source,
                                 const std::vector<metrics::SweepPoint>& target,
                                 Criterion criterion, double value, std::string direction) {
  if (!(value >= 0.0 && value <= 1.0)) {
    ThrowUsage(std::string(CriterionName(criterion)) + " value must be in [0,1]");
  }
  for (std::size_t i = 1; i < source.size(); ++i) {
    if (!(source[i].epsilon > source[i - 1].epsilon)) ThrowData("source curve epsilons not increasing");
  }

  std::optional<double> eps_star;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < source.size() && !eps_star; ++i) {
    const double m = Metric(source[i], criterion);
    if (std::isnan(m)) continue;
    lo = std::min(lo, m);
    hi = std::max(hi, m);
    if (m == value) {
      eps_star = source[i].epsilon;
      break;
    }
    if (i + 1 == source.size()) break;
    const double m2 = Metric(source[i + 1], criterion);
    if (std::isnan(m2)) continue;
    if ((m < value && value < m2) || (m2 < value && value < m)) {
      const double t = (value - m) / (m2 - m);
      eps_star = Lerp(source[i].epsilon, source[i + 1].epsilon, t);
    }
  }
  if (!eps_star) {
    for (const auto& p : source) {
      const double m = Metric(p, criterion);
      if (!std::isnan(m)) {
        lo = std::min(lo, m);
        hi = std::max(hi, m);
      }
    }
    if (lo > hi) {
      ThrowData(std::string(CriterionName(criterion)) + " " + FormatDouble(value) +
                " not reachable: source curve has no defined values");
    }
    ThrowData(std::string(CriterionName(criterion)) + " " + FormatDouble(value) +
              " outside the source curve's achievable range [" + FormatDouble(lo) + ", " +
              FormatDouble(hi) + "]");
  }

  TransferResult r;
  r.direction = std::move(direction);
  r.criterion = criterion;
  r.value = value;
  r.epsilon_star = *eps_star;
  r.source = Interpolate(source, r.epsilon_star);
  r.target = Interpolate(target, r.epsilon_star);
  return r;
}

}  // namespace selgate::shift
