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

// Cross-condition analyses: matched pairs, confidence distribution summaries,
// high-confidence mass and threshold transfer between sweep curves.

#ifndef SELGATE_SHIFT_HPP_
#define SELGATE_SHIFT_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "corpus.hpp"
#include "gateway.hpp"
#include "metrics.hpp"

namespace selgate::shift {

// parse_ok and a confidence signal present. The threshold plays no part.
bool IsValid(const gateway::Record& record, metrics::Signal signal);

struct MatchedPair {
  std::string question_id;
  gateway::Record a;
  gateway::Record b;
};

// Ids valid on both sides, in the order of `log_a`. A repeated id inside
// either log is a data error.
std::vector<MatchedPair> MatchInstances(const std::vector<gateway::Record>& log_a,
                                        const std::vector<gateway::Record>& log_b,
                                        metrics::Signal signal = metrics::Signal::kAuto);

struct DistributionStats {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double iqr = 0.0;
};

// Quartiles are medians of the lower and upper halves; for odd n both halves
// include the median. Data error on empty input.
DistributionStats Describe(std::vector<double> values);

struct HighConfMass {
  long n = 0;       // valid records
  long n_high = 0;  // confidence >= tau
  double mass = 0.0;
  double error_rate = 0.0;  // NaN when n_high == 0
};

// Over valid records only. A null choice counts as an error.
HighConfMass HighConfidenceMass(const std::vector<gateway::Record>& records,
                                const corpus::AnswerKey& key, double tau = 0.9,
                                metrics::Signal signal = metrics::Signal::kAuto);

struct DeltaSummary {
  std::size_t n = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double delta_abs = 0.0;  // mean_b - mean_a
  double delta_rel = 0.0;  // delta_abs / mean_a
};

// Data error on an empty pair list.
DeltaSummary Delta(const std::vector<MatchedPair>& pairs,
                   metrics::Signal signal = metrics::Signal::kAuto);

enum class Criterion { kFixedRisk, kFixedCoverage };
std::string_view CriterionName(Criterion c);

struct CurveValue {
  double risk = 0.0;
  double coverage = 0.0;
  double n = 0.0;  // interpolated, so fractional in general
};

struct TransferResult {
  std::string direction;
  Criterion criterion = Criterion::kFixedRisk;
  double value = 0.0;
  double epsilon_star = 0.0;
  CurveValue source;
  CurveValue target;
};

// Piecewise-linear value of a curve at epsilon. risk is NaN when either
// neighbour is NaN. Usage error outside the curve's epsilon range.
CurveValue Interpolate(const std::vector<metrics::SweepPoint>& curve, double epsilon);

// Smallest epsilon where the source metric named by `criterion` equals
// `value`, scanning adjacent non-NaN points in ascending epsilon. Data error
// naming the achievable range when no segment crosses `value`.
TransferResult ThresholdTransfer(const std::vector<metrics::SweepPoint>& source,
                                 const std::vector<metrics::SweepPoint>& target,
                                 Criterion criterion, double value,
                                 std::string direction = "source->target");

}  // namespace selgate::shift

#endif  // SELGATE_SHIFT_HPP_
