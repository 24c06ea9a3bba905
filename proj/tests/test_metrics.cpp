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

#include <cmath>
#include <random>

#include "doctest.h"
#include "metrics.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using namespace selgate;
using namespace selgate::metrics;
using gateway::Record;

namespace {

Record Json(const std::string& id, std::optional<double> conf, std::optional<Label> choice) {
  Record r;
  r.question_id = id;
  r.parse_ok = true;
  gateway::Payload p;
  p.choice = choice;
  p.confidence = conf;
  r.payload = p;
  return r;
}

Record Failed(const std::string& id) {
  Record r;
  r.question_id = id;
  r.failure = gateway::FailureReason::kNotJson;
  return r;
}

std::vector<Scored> Repeat(double c, int n, int correct) {
  std::vector<Scored> out;
  for (int i = 0; i < n; ++i) out.push_back({c, i < correct});
  return out;
}

}  // namespace

TEST_CASE("gate clauses") {
  CHECK(Gate(Json("a", 0.71, Label::kA), 0.71).accepted);
  CHECK(Gate(Json("a", 0.7099999, Label::kA), 0.71).reason == GateReason::kBelowThreshold);
  CHECK(Gate(Failed("a"), 0.0).reason == GateReason::kParseFailure);
  CHECK(Gate(Json("a", 0.9, std::nullopt), 0.0).reason == GateReason::kNullChoice);
  CHECK(Gate(Json("a", std::nullopt, Label::kA), 0.0).reason == GateReason::kMissingConfidence);
  auto flagged = Json("a", 0.9, Label::kC);
  flagged.payload->abstain = true;
  CHECK(Gate(flagged, 0.5).accepted);

  // Letter mode reads p_max; without a distribution the confidence is missing.
  Record letter = Json("a", std::nullopt, Label::kB);
  letter.mode = gateway::Mode::kLetter;
  CHECK(Gate(letter, 0.0).reason == GateReason::kMissingConfidence);
  letter.option_distribution = gateway::Renormalize({-1, -1, -1, -1, -1});
  CHECK(*ConfidenceOf(letter, Signal::kAuto) == doctest::Approx(0.2));
  letter.option_distribution = gateway::Renormalize({0, -100, -100, -100, -100});
  CHECK(*ConfidenceOf(letter, Signal::kAuto) == doctest::Approx(1.0));
  CHECK_FALSE(ConfidenceOf(letter, Signal::kSelf));
}

TEST_CASE("four record hand example") {
  std::vector<corpus::Item> items = {testutil::MakeItem("1", "CW", Label::kA), testutil::MakeItem("2", "CW", Label::kA),
                                     testutil::MakeItem("3", "CW", Label::kA), testutil::MakeItem("4", "CW", Label::kA)};
  const corpus::AnswerKey key(items);
  const std::vector<Record> log = {Json("1", 0.9, Label::kA), Json("2", 0.6, Label::kA),
                                   Json("3", 0.95, Label::kB), Json("4", 0.3, Label::kB)};
  const auto p = RiskCoverage(log, key, 0.71, {Signal::kAuto, 0});
  CHECK(p.coverage == 0.5);
  CHECK(p.risk == 0.5);
  CHECK(p.n_accepted == 2);
  CHECK(std::isnan(RiskCoverage(log, key, 0.71).risk));  // default min_n 50

  const std::vector<Record> failed = {Failed("1"), Failed("2")};
  const auto f = RiskCoverage(failed, key, 0.0, {Signal::kAuto, 0});
  CHECK(f.coverage == 0.0);
  CHECK(std::isnan(f.risk));

  CHECK_THROWS_AS(Sweep(std::vector<Record>{}, key, DefaultGrid()), Error);
  CHECK_THROWS_AS(Sweep(std::vector<Record>{Json("zzz", 0.5, Label::kA)}, key, DefaultGrid()), Error);
}

TEST_CASE("ece hand examples") {
  CHECK(Ece(Repeat(1.0, 20, 20)).ece == 0.0);
  CHECK(Ece(Repeat(0.8, 10, 6)).ece == doctest::Approx(0.2).epsilon(1e-12));
  auto two = Repeat(0.75, 5, 4);
  const auto hi = Repeat(0.95, 5, 5);
  two.insert(two.end(), hi.begin(), hi.end());
  CHECK(Ece(two).ece == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(std::isnan(Ece({}).ece));
}

TEST_CASE("bin edges") {
  for (int b = 0; b <= 10; ++b) CHECK(BinIndex(b / 10.0) == std::min(b, 9));
  CHECK(BinIndex(0.0999999) == 0);
  CHECK(BinIndex(0.3) == 3);  // 0.3 is not exactly 3/10 * 10 in binary
  CHECK(BinIndex(1.0) == 9);
  for (int i = 0; i <= 1000; ++i) CHECK(BinIndex(i / 1000.0) == testutil::RefBin(i / 1000.0));
}

TEST_CASE("default grid") {
  const auto g = DefaultGrid();
  REQUIRE(g.size() == 25);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  for (double want : {0.5417, 0.625, 0.7083, 0.8333, 0.9167}) {
    bool found = false;
    for (double e : g) found = found || std::fabs(e - want) < 5e-5;
    CHECK(found);
  }
  CHECK_THROWS_AS(ValidateGrid({0.5, 0.2}), Error);
  CHECK_THROWS_AS(ValidateGrid({1.5}), Error);
  CHECK_THROWS_AS(ValidateGrid({}), Error);
}

TEST_CASE("grid of zero reduces the gate to validity") {
  const auto items = testutil::MakeItems(400);
  const corpus::AnswerKey key(items);
  std::mt19937_64 rng(3);
  const auto log = testutil::RandomLog(items, rng);
  long valid = 0;
  for (const auto& r : log) {
    double c;
    valid += r.parse_ok && r.payload->choice && testutil::RefHasConfidence(r, &c);
  }
  const auto p = Sweep(log, key, {0.0}).front();
  CHECK(p.coverage == static_cast<double>(valid) / 400.0);
}

TEST_CASE("sweep equals the brute-force recount") {
  for (int seed = 0; seed < 30; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    const auto items = testutil::MakeItems(1 + rng() % 600);
    const corpus::AnswerKey key(items);
    const auto log = testutil::RandomLog(items, rng);
    const long min_n = seed % 3 == 0 ? 0 : 50;
    const auto got = Sweep(log, key, DefaultGrid(), {Signal::kAuto, min_n});
    const auto want = testutil::RefSweep(log, items, DefaultGrid(), min_n);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].n_accepted == want[i].n_accepted);
      CHECK(testutil::Close(got[i].coverage, want[i].coverage, 1e-12));
      CHECK(testutil::Close(got[i].abstention, want[i].abstention, 1e-12));
      CHECK(testutil::Close(got[i].risk, want[i].risk, 1e-12));
      CHECK(testutil::Close(got[i].acc_cond, want[i].acc_cond, 1e-12));
      CHECK(testutil::Close(got[i].ece, want[i].ece, 1e-12));
    }
  }
}

TEST_CASE("sweep invariants") {
  for (int seed = 100; seed < 140; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    const auto items = testutil::MakeItems(50 + rng() % 500);
    const corpus::AnswerKey key(items);
    const auto log = testutil::RandomLog(items, rng);
    const auto grid = EvenGrid(101);
    const auto pts = Sweep(log, key, grid, {Signal::kAuto, 0});
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& p = pts[i];
      CHECK(p.coverage + p.abstention == 1.0);
      if (i > 0) {
        CHECK(p.coverage <= pts[i - 1].coverage);
        CHECK(p.abstention >= pts[i - 1].abstention);
      }
      if (p.n_accepted == 0) continue;
      CHECK(p.acc_cond == 1.0 - p.risk);
      CHECK(p.ece >= 0.0);
      CHECK(p.ece <= 1.0);
      // Accounting identity, exact in integers.
      long wrong = 0;
      for (const auto& r : log) {
        if (Gate(r, p.epsilon).accepted && *r.payload->choice != key.At(r.question_id).answer) ++wrong;
      }
      CHECK(std::lround(p.risk * static_cast<double>(p.n_accepted)) == wrong);
      // Bins recompute the sweep's ECE.
      const auto rel = ReliabilityAt(log, key, p.epsilon, Signal::kAuto);
      long total = 0;
      double ece = 0.0;
      for (const auto& b : rel.bins) {
        total += b.count;
        if (b.count) ece += static_cast<double>(b.count) / static_cast<double>(rel.n) * std::fabs(b.accuracy - b.mean_confidence);
      }
      CHECK(total == p.n_accepted);
      CHECK(ece == doctest::Approx(p.ece).epsilon(1e-12));
    }
  }
}

TEST_CASE("calibrated oracle at moderate n") {
  const auto items = testutil::MakeItems(20000);
  oracle::Params params;
  params.base_acc_by_group = {0.6, 0.6, 0.6};
  params.spread = 0.4;
  std::vector<Scored> scored;
  for (const auto& it : items) {
    const auto d = oracle::DrawItem(it, "baseline18", gateway::Mode::kJson, params, 12);
    scored.push_back({d.confidence, d.correct});
  }
  ScoredLog log{scored.size(), scored};
  CHECK(Ece(scored).ece < 0.02);
  const auto pts = Sweep(log, DefaultGrid(), 50);
  // c ~ U[0.2, 1.0]; E[1 - c | c >= e] = 1 - (max(e, 0.2) + 1) / 2.
  for (const auto& p : pts) {
    if (std::isnan(p.risk)) continue;
    const double expect = 1.0 - (std::max(p.epsilon, 0.2) + 1.0) / 2.0;
    const double sigma = std::sqrt(std::max(expect * (1 - expect), 1e-12) / static_cast<double>(p.n_accepted));
    CHECK(std::fabs(p.risk - expect) <= 3 * sigma + 1e-12);
  }
}

TEST_CASE("per group table") {
  SUBCASE("single group equals the global metrics") {
    std::vector<corpus::Item> items;
    for (int i = 0; i < 200; ++i) items.push_back(testutil::MakeItem("t" + std::to_string(i), "TC", Label::kD));
    const corpus::AnswerKey key(items);
    std::mt19937_64 rng(4);
    const auto log = testutil::RandomLog(items, rng);
    const std::vector<double> eps = {0.0, 0.5, 17.0 / 24.0};
    const auto rows = PerGroupTable(log, key, eps);
    const auto global = Sweep(log, key, eps, {Signal::kAuto, 0});
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const auto& row = rows[3 + i];  // temporal block
      CHECK(row.group == corpus::Group::kTemporal);
      CHECK(row.n == 200);
      CHECK(row.n_accepted == global[i].n_accepted);
      CHECK(row.coverage == global[i].coverage);
      CHECK(row.acc_cond == doctest::Approx(global[i].acc_cond).epsilon(1e-12));
      CHECK(rows[i].n == 0);
      CHECK(std::isnan(rows[i].coverage));
    }
  }
  SUBCASE("oracle group accuracies come back within 3 sigma") {
    const auto items = testutil::MakeItems(24000);
    const corpus::AnswerKey key(items);
    oracle::Params params;  // 0.8 / 0.65 / 0.85
    std::vector<Record> log;
    for (const auto& it : items) {
      const auto d = oracle::DrawItem(it, "baseline18", gateway::Mode::kJson, params, 77);
      log.push_back(Json(it.question_id, d.confidence, d.choice));
    }
    const auto rows = PerGroupTable(log, key, {0.0});
    for (std::size_t g = 0; g < 3; ++g) {
      const double p = params.base_acc_by_group[g];
      const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(rows[g].n));
      CHECK(std::fabs(rows[g].acc_cond - p) <= 3 * sigma);
      CHECK(rows[g].coverage == 1.0);
    }
  }
}
