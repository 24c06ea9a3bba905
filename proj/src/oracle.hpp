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

// Seeded synthetic model that speaks the adapter protocol. Its correctness and
// confidence follow a known generating law, which makes it the reference data
// source for metric tests.

#ifndef SELGATE_ORACLE_HPP_
#define SELGATE_ORACLE_HPP_

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "corpus.hpp"
#include "gateway.hpp"

namespace selgate::oracle {

enum class ConfidenceLaw {
  kCalibrated,     // confidence = correctness probability
  kOverconfident,  // confidence = min(1, probability + law_value)
  kConstant,       // confidence = law_value
};
std::string_view LawName(ConfidenceLaw law);
ConfidenceLaw ParseLaw(std::string_view name);

struct Params {
  // Mean correctness probability per group (Causal, Temporal, Descriptive).
  std::array<double, 3> base_acc_by_group = {0.8, 0.65, 0.85};
  // Subtracted from the probability under any condition other than baseline18.
  double degradation_penalty = 0.0;
  // Per-item probability is base + spread * (2u - 1), u ~ U[0,1) fixed per item.
  double spread = 0.0;
  ConfidenceLaw law = ConfidenceLaw::kCalibrated;
  double law_value = 0.0;
  // Reported confidence is rounded to a multiple of this when > 0.
  double confidence_quantum = 0.0;
  // Chance that any single response is malformed text.
  double malformed_rate = 0.0;
  // Share of first-token mass on the A-E tokens in letter mode.
  double letter_mass = 0.9;

  void Validate() const;
};

struct Draw {
  double probability = 0.0;  // true correctness probability
  bool correct = false;
  Label choice = Label::kA;
  double confidence = 0.0;
};

Draw DrawItem(const corpus::Item& item, std::string_view condition, gateway::Mode mode,
              const Params& params, std::uint64_t seed);

// The adapter response line for one request. Deterministic in
// (item, condition, mode, params, seed, attempt).
gateway::Response Respond(const corpus::Item& item, std::string_view condition,
                          const gateway::Request& request, const Params& params,
                          std::uint64_t seed, int attempt);

// Serves requests from `in` until EOF (or after `crash_after` responses when
// positive). Returns a process exit code.
int Serve(std::istream& in, std::ostream& out, const corpus::AnswerKey& key,
          std::string_view condition, const Params& params, std::uint64_t seed,
          long crash_after = 0);

}  // namespace selgate::oracle

#endif  // SELGATE_ORACLE_HPP_
