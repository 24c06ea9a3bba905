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

// Abstention gate and selective-prediction metrics: coverage, risk, ECE and
// the threshold sweep.

#ifndef SELGATE_METRICS_HPP_
#define SELGATE_METRICS_HPP_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "corpus.hpp"
#include "gateway.hpp"

namespace selgate::metrics {

inline constexpr int kNumBins = 10;
inline constexpr long kDefaultMinN = 50;

// Which number is the gating confidence. kAuto uses p_max for letter-mode
// records and the self-reported confidence otherwise.
enum class Signal { kAuto, kSelf, kPmax };
std::string_view SignalName(Signal signal);
Signal ParseSignal(std::string_view name);

// nullopt means "missing confidence" for gating purposes.
std::optional<double> ConfidenceOf(const gateway::Record& record, Signal signal);

enum class GateReason { kOk, kParseFailure, kNullChoice, kMissingConfidence, kBelowThreshold };
std::string_view GateReasonName(GateReason reason);

struct GateDecision {
  std::string question_id;
  bool accepted = false;
  GateReason reason = GateReason::kOk;
};

// Abstains on parse failure, null choice, missing confidence or
// confidence < epsilon. The model's own abstain flag is never read.
GateDecision Gate(const gateway::Record& record, double epsilon, Signal signal = Signal::kAuto);

struct SweepPoint {
  double epsilon = 0.0;
  double risk = 0.0;      // NaN when n_accepted < min_n
  double coverage = 0.0;
  double abstention = 0.0;
  double acc_cond = 0.0;  // NaN when n_accepted < min_n
  double ece = 0.0;       // NaN when n_accepted < min_n
  long n_accepted = 0;
};

struct Bin {
  long count = 0;
  double mean_confidence = 0.0;  // NaN for empty bins
  double accuracy = 0.0;         // NaN for empty bins
};

struct Reliability {
  std::array<Bin, kNumBins> bins{};
  long n = 0;
  double ece = 0.0;  // NaN when n == 0
};

// Bins are [b/10, (b+1)/10) except the last, which is [0.9, 1.0].
int BinIndex(double confidence);

struct Scored {
  double confidence = 0.0;
  bool correct = false;
};

// ECE over accepted (confidence, correctness) pairs.
Reliability Ece(const std::vector<Scored>& accepted);

struct SweepOptions {
  Signal signal = Signal::kAuto;
  long min_n = kDefaultMinN;  // 0 disables the NaN rule
};

// Per-record gate inputs after resolving the answer key. Throws a data error
// when a record's id is not in the key, or on an empty log.
struct ScoredLog {
  std::size_t total = 0;            // every record, valid or not
  std::vector<Scored> eligible;     // parse_ok, choice and confidence present
};
ScoredLog ScoreLog(const std::vector<gateway::Record>& records, const corpus::AnswerKey& key,
                   Signal signal);

SweepPoint RiskCoverage(const std::vector<gateway::Record>& records, const corpus::AnswerKey& key,
                        double epsilon, const SweepOptions& options = {});
Reliability ReliabilityAt(const std::vector<gateway::Record>& records,
                          const corpus::AnswerKey& key, double epsilon, Signal signal);

// i / (count - 1) for i in [0, count). count 1 gives {0}.
std::vector<double> EvenGrid(int count);
// The 25-point grid i/24.
std::vector<double> DefaultGrid();
// Usage error unless nonempty, nondecreasing and inside [0, 1].
void ValidateGrid(const std::vector<double>& grid);

std::vector<SweepPoint> Sweep(const std::vector<gateway::Record>& records,
                              const corpus::AnswerKey& key, const std::vector<double>& grid,
                              const SweepOptions& options = {});
// Same as above from pre-scored input; used by the large synthetic runs.
std::vector<SweepPoint> Sweep(const ScoredLog& log, const std::vector<double>& grid,
                              long min_n = kDefaultMinN);

struct GroupRow {
  corpus::Group group = corpus::Group::kCausal;
  double epsilon = 0.0;
  long n = 0;
  long n_accepted = 0;
  double coverage = 0.0;
  double acc_cond = 0.0;  // NaN only when nothing is accepted
};

// Group-major, then epsilon order. No NaN rule.
std::vector<GroupRow> PerGroupTable(const std::vector<gateway::Record>& records,
                                    const corpus::AnswerKey& key,
                                    const std::vector<double>& epsilons,
                                    Signal signal = Signal::kAuto);

}  // namespace selgate::metrics

#endif  // SELGATE_METRICS_HPP_
