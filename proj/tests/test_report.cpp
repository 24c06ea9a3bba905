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

#include "commands.hpp"
#include "csv.hpp"
#include "doctest.h"
#include "plot.hpp"
#include "test_util.hpp"

using namespace selgate;

namespace {

bool SameBits(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

TEST_CASE("sweep csv round trips losslessly") {
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    const auto items = testutil::MakeItems(1 + rng() % 300);
    const corpus::AnswerKey key(items);
    const auto log = testutil::RandomLog(items, rng);
    const auto pts = metrics::Sweep(log, key, metrics::DefaultGrid());
    const auto text = csv::WriteSweep(pts);
    const auto back = csv::ParseSweep(text);
    REQUIRE(back.size() == pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(SameBits(back[i].epsilon, pts[i].epsilon));
      CHECK(SameBits(back[i].risk, pts[i].risk));
      CHECK(SameBits(back[i].coverage, pts[i].coverage));
      CHECK(SameBits(back[i].abstention, pts[i].abstention));
      CHECK(SameBits(back[i].acc_cond, pts[i].acc_cond));
      CHECK(SameBits(back[i].ece, pts[i].ece));
      CHECK(back[i].n_accepted == pts[i].n_accepted);
    }
    CHECK(csv::WriteSweep(back) == text);
  }
}

TEST_CASE("sweep csv format") {
  metrics::SweepPoint p;
  p.epsilon = 0.5;
  p.coverage = 0.25;
  p.abstention = 0.75;
  p.risk = p.acc_cond = p.ece = std::nan("");
  p.n_accepted = 3;
  CHECK(csv::WriteSweep({p}) == "epsilon,risk,coverage,abstention,acc_cond,ece,n_accepted\n0.5,,0.25,0.75,,,3\n");
  CHECK_THROWS_AS(csv::ParseSweep("eps,risk\n"), Error);
  CHECK_THROWS_AS(csv::ParseSweep(std::string(csv::kSweepHeader) + "\n0.5,,0.25\n"), Error);
  CHECK_THROWS_AS(csv::ParseSweep(std::string(csv::kSweepHeader) + "\n0.5,x,0.25,0.75,,,3\n"), Error);
  CHECK_THROWS_AS(csv::ParseSweep(std::string(csv::kSweepHeader) + "\n,,0.25,0.75,,,3\n"), Error);
  CHECK_THROWS_AS(csv::ParseSweep(""), Error);
}

TEST_CASE("svg output is deterministic and carries the renderer version") {
  const auto items = testutil::MakeItems(300);
  const corpus::AnswerKey key(items);
  std::mt19937_64 rng(1);
  const auto log = testutil::RandomLog(items, rng);
  const auto pts = metrics::Sweep(log, key, metrics::DefaultGrid(), {metrics::Signal::kAuto, 0});
  const std::vector<plot::NamedCurve> curves = {{"a & <b>", pts}};
  const auto svg = plot::RiskCoverage(curves, "title");
  CHECK(svg == plot::RiskCoverage(curves, "title"));
  CHECK(svg.find(std::string(plot::kRendererVersion)) != std::string::npos);
  CHECK(svg.find("a &amp; &lt;b&gt;") != std::string::npos);
  CHECK(svg.rfind("</svg>\n") == svg.size() - 7);

  const auto rel = metrics::ReliabilityAt(log, key, 0.5, metrics::Signal::kAuto);
  CHECK(plot::ReliabilityDiagram(rel, 0.5, "r") == plot::ReliabilityDiagram(rel, 0.5, "r"));
  CHECK(plot::EceVsThreshold(curves, "e") == plot::EceVsThreshold(curves, "e"));
  const auto cdf = plot::CdfComparison({{"x", {0.1, 0.5, 0.5, 0.9}}}, 0.9, "c");
  CHECK(cdf.find("tau = 0.90") != std::string::npos);
}

TEST_CASE("reliability and group tables") {
  metrics::Reliability rel = metrics::Ece({{0.85, true}, {0.85, false}});
  const auto text = csv::WriteReliability(rel);
  CHECK(text.find("bin,lo,hi,count,mean_confidence,accuracy\n") == 0);
  CHECK(text.find("\n8,0.8,0.9,2,0.85,0.5\n") != std::string::npos);
  CHECK(text.find("\n0,0,0.1,0,,\n") != std::string::npos);
}

TEST_CASE("grid flag resolution") {
  CHECK(commands::ResolveGrid("") == metrics::DefaultGrid());
  CHECK(commands::ResolveGrid("5") == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(commands::ResolveGrid("0,0.5,1") == std::vector<double>{0.0, 0.5, 1.0});
  CHECK_THROWS_AS(commands::ResolveGrid("0.5,0.1"), Error);
  CHECK_THROWS_AS(commands::ResolveGrid("a,b"), Error);
  CHECK(commands::ItemListDigest({"a", "b"}) == Sha256Hex("a\nb\n"));
}
