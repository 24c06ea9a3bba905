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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "oracle.hpp"
#include "test_util.hpp"

using namespace selgate;
using namespace selgate::oracle;

namespace {

Params Flat(double p) {
  Params params;
  params.base_acc_by_group = {p, p, p};
  return params;
}

}  // namespace

TEST_CASE("probability one is always correct with confidence one") {
  const auto items = testutil::MakeItems(500);
  for (const auto& it : items) {
    const auto d = DrawItem(it, "baseline18", gateway::Mode::kJson, Flat(1.0), 4);
    CHECK(d.correct);
    CHECK(d.choice == it.answer);
    CHECK(d.confidence == 1.0);
  }
}

TEST_CASE("wrong answers never pick the key") {
  for (const auto& it : testutil::MakeItems(500)) {
    const auto d = DrawItem(it, "baseline18", gateway::Mode::kJson, Flat(0.0), 4);
    CHECK_FALSE(d.correct);
    CHECK(d.choice != it.answer);
  }
}

TEST_CASE("calibrated accuracy matches the probability") {
  const auto items = testutil::MakeItems(10000);
  long right = 0;
  for (const auto& it : items) right += DrawItem(it, "baseline18", gateway::Mode::kJson, Flat(0.7), 99).correct;
  CHECK(std::fabs(static_cast<double>(right) / 10000.0 - 0.7) <= 0.02);
}

TEST_CASE("laws, penalty, spread and quantum") {
  const auto it = testutil::MakeItem("x", "TN");
  Params p = Flat(0.6);
  p.law = ConfidenceLaw::kOverconfident;
  p.law_value = 0.3;
  CHECK(DrawItem(it, "baseline18", gateway::Mode::kJson, p, 1).confidence == doctest::Approx(0.9));
  p.law = ConfidenceLaw::kConstant;
  p.law_value = 0.42;
  CHECK(DrawItem(it, "sparse6", gateway::Mode::kJson, p, 1).confidence == 0.42);
  p = Flat(0.6);
  p.degradation_penalty = 0.1;
  CHECK(DrawItem(it, "sparse6", gateway::Mode::kJson, p, 1).probability == doctest::Approx(0.5));
  CHECK(DrawItem(it, "baseline18", gateway::Mode::kJson, p, 1).probability == doctest::Approx(0.6));
  p.spread = 0.2;
  p.confidence_quantum = 0.05;
  for (const auto& item : testutil::MakeItems(200)) {
    const auto d = DrawItem(item, "baseline18", gateway::Mode::kJson, p, 1);
    CHECK(d.probability >= 0.4);
    CHECK(d.probability <= 0.8);
    CHECK(std::fabs(d.confidence / 0.05 - std::round(d.confidence / 0.05)) < 1e-9);
  }
  Params bad;
  bad.spread = 2.0;
  CHECK_THROWS_AS(bad.Validate(), Error);
  CHECK_THROWS_AS(ParseLaw("sometimes"), Error);
}

TEST_CASE("responses are deterministic") {
  const auto items = testutil::MakeItems(100);
  Params p;
  p.spread = 0.3;
  p.malformed_rate = 0.1;
  for (const auto mode : {gateway::Mode::kJson, gateway::Mode::kLetter}) {
    gateway::GenerationConfig cfg;
    cfg.mode = mode;
    for (const auto& it : items) {
      const auto req = gateway::BuildRequest(it, {}, cfg);
      CHECK(gateway::SerializeResponse(Respond(it, "baseline18", req, p, 8, 0)) ==
            gateway::SerializeResponse(Respond(it, "baseline18", req, p, 8, 0)));
    }
  }
}

TEST_CASE("letter mode keeps the chosen letter on top") {
  Params p;
  p.spread = 0.4;
  gateway::GenerationConfig cfg;
  cfg.mode = gateway::Mode::kLetter;
  for (const auto& it : testutil::MakeItems(300)) {
    const auto r = Respond(it, "baseline18", gateway::BuildRequest(it, {}, cfg), p, 5, 0);
    const auto d = DrawItem(it, "baseline18", gateway::Mode::kLetter, p, 5);
    const auto dist = gateway::Renormalize(gateway::ExtractOptionLogprobs(*r.candidates).values);
    CHECK(gateway::ParseLetter(r.raw_text).value == d.choice);
    CHECK(dist.p_max == doctest::Approx(std::max(d.confidence, 0.2)).epsilon(1e-9));
    CHECK(dist.p[LabelIndex(d.choice)] == dist.p_max);
  }
}

TEST_CASE("serve pairs every request and honours crash_after") {
  const auto items = testutil::MakeItems(10);
  const corpus::AnswerKey key(items);
  std::string input;
  for (const auto& it : items) input += gateway::SerializeRequest(gateway::BuildRequest(it, {}, {})) + "\n";
  std::istringstream in(input);
  std::ostringstream out;
  CHECK(Serve(in, out, key, "baseline18", Params{}, 1) == 0);
  std::istringstream lines(out.str());
  std::string line;
  std::size_t i = 0;
  while (std::getline(lines, line)) CHECK(gateway::ParseResponse(line).id == items[i++].question_id);
  CHECK(i == items.size());

  std::istringstream in2(input);
  std::ostringstream out2;
  CHECK(Serve(in2, out2, key, "baseline18", Params{}, 1, 3) != 0);
  const std::string served = out2.str();
  CHECK(std::count(served.begin(), served.end(), '\n') == 3);
}
