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

// The adapter line protocol, exercised against the oracle adapter process.

#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "gateway.hpp"
#include "subprocess.hpp"
#include "test_util.hpp"

using namespace selgate;
using namespace selgate::gateway;
using namespace std::chrono_literals;

namespace {

std::string OracleCommand(const fs::path& items, const std::string& extra = "") {
  return std::string("'") + SG_ORACLE + "' --items '" + items.string() + "' --condition baseline18 --seed 3 " + extra;
}

}  // namespace

TEST_CASE("requests and responses round trip with adversarial text") {
  std::mt19937_64 rng(17);
  // Sliced below at byte offsets, so the multi-byte character sits at the end.
  const std::string nasty = "\"\\\n\r\t{}[],:\x01 ' \xc3\xa9";
  const auto cut = [&](std::size_t n) { return nasty.substr(0, std::min(n, nasty.size() - 2)); };
  for (int t = 0; t < 200; ++t) {
    Request r;
    r.id = "id" + std::to_string(t) + cut(rng() % nasty.size());
    r.config.mode = t % 2 ? Mode::kLetter : Mode::kJson;
    r.question = nasty + std::to_string(rng());
    for (auto& o : r.options) o = cut(rng() % nasty.size()) + nasty;
    r.frames = {{"/tmp/a b/frame_000.jpg", 0.5}, {"/tmp/\"q\".jpg", 1.25}};
    const auto line = SerializeRequest(r);
    CHECK(line.find('\n') == std::string::npos);
    const auto back = ParseRequest(line);
    CHECK(back.id == r.id);
    CHECK(back.question == r.question);
    CHECK(back.options == r.options);
    CHECK(back.config.mode == r.config.mode);
    REQUIRE(back.frames.size() == 2);
    CHECK(back.frames[1].path == r.frames[1].path);
    CHECK(SerializeRequest(back) == line);

    Response resp;
    resp.id = r.id;
    resp.ok = true;
    resp.raw_text = nasty;
    resp.candidates = std::vector<Candidate>{{"A", -0.25}, {" B", -1.5}};
    const auto rl = SerializeResponse(resp);
    CHECK(rl.find('\n') == std::string::npos);
    const auto rb = ParseResponse(rl);
    CHECK(rb.raw_text == nasty);
    CHECK(rb.candidates->at(1).token == " B");
    CHECK(SerializeResponse(rb) == rl);
  }
  CHECK_THROWS_AS(ParseRequest("{}"), Error);
  CHECK_THROWS_AS(ParseResponse("not json"), Error);
}

TEST_CASE("request bodies are stable") {
  const auto item = testutil::MakeItem("q1", "TN", Label::kC);
  GenerationConfig cfg;
  const std::vector<FrameRef> frames = {{"/f0.jpg", 0.5}, {"/f1.jpg", 1.5}};
  CHECK(SerializeRequest(BuildRequest(item, frames, cfg)) == SerializeRequest(BuildRequest(item, frames, cfg)));
  const auto req = BuildRequest(item, frames, cfg);
  CHECK(req.frames[0].timestamp < req.frames[1].timestamp);
  CHECK(SerializeRequest(req).find("logprob_top_k") == std::string::npos);
  cfg.mode = Mode::kLetter;
  CHECK(SerializeRequest(BuildRequest(item, frames, cfg)).find("\"logprob_top_k\":20") != std::string::npos);
}

TEST_CASE("oracle adapter speaks the protocol") {
  testutil::TempDir dir;
  const auto items = testutil::MakeItems(50);
  testutil::WriteText(dir / "items.jsonl", corpus::SerializeItems(items));

  SUBCASE("one response per request, ids and order preserved") {
    LineProcess p(OracleCommand(dir / "items.jsonl"));
    GenerationConfig cfg;
    for (const auto& it : items) REQUIRE(p.WriteLine(SerializeRequest(BuildRequest(it, {}, cfg))));
    REQUIRE(p.WriteLine(R"({"id":"weird","mode":"telepathy","prompt_version":"v1","question":"q","options":{"A":"","B":"","C":"","D":"","E":""},"frames":[],"generation":{"temperature":0,"max_tokens":256}})"));
    Request unknown = BuildRequest(items[0], {}, cfg);
    unknown.id = "no-such-item";
    REQUIRE(p.WriteLine(SerializeRequest(unknown)));
    for (const auto& it : items) {
      const auto line = p.ReadLine(5000ms);
      REQUIRE(line);
      const auto r = ParseResponse(*line);
      CHECK(r.id == it.question_id);
      CHECK(r.ok);
    }
    const auto bad = ParseResponse(*p.ReadLine(5000ms));
    CHECK(bad.id == "weird");
    CHECK_FALSE(bad.ok);
    CHECK(bad.error == "bad_mode");
    const auto missing = ParseResponse(*p.ReadLine(5000ms));
    CHECK(missing.id == "no-such-item");
    CHECK_FALSE(missing.ok);
    CHECK(missing.error == "unknown_item");
    CHECK(p.Close() == 0);
  }

  SUBCASE("json smoke set parses at or above the floor") {
    ProcessAdapter a(OracleCommand(dir / "items.jsonl", "--malformed-rate 0.02"));
    GenerationConfig cfg;
    int parsed = 0;
    for (const auto& it : items) {
      const auto r = a.Call(BuildRequest(it, {{"/f.jpg", 0.5}}, cfg));
      REQUIRE(r);
      parsed += ParseJsonPayload(r->raw_text).ok() ? 1 : 0;
    }
    CHECK(parsed >= 48);  // 95% of 50, rounded up
  }

  SUBCASE("letter candidates include all five option letters") {
    ProcessAdapter a(OracleCommand(dir / "items.jsonl", "--law constant --law-value 0.97"));
    GenerationConfig cfg;
    cfg.mode = Mode::kLetter;
    for (const auto& it : items) {
      const auto r = a.Call(BuildRequest(it, {}, cfg));
      REQUIRE(r);
      REQUIRE(r->candidates);
      CHECK(r->candidates->size() <= static_cast<std::size_t>(kLogprobTopK));
      std::set<std::string> letters;
      for (const auto& c : *r->candidates) {
        if (ParseLabel(c.token)) letters.insert(c.token);
      }
      CHECK(letters.size() == 5);
    }
  }

  SUBCASE("a crashed adapter turns unhealthy") {
    ProcessAdapter a(OracleCommand(dir / "items.jsonl", "--crash-after 2"), 5000ms);
    GenerationConfig cfg;
    CHECK(a.Call(BuildRequest(items[0], {}, cfg)));
    CHECK(a.Call(BuildRequest(items[1], {}, cfg)));
    CHECK_FALSE(a.Call(BuildRequest(items[2], {}, cfg)));
    CHECK_FALSE(a.healthy());
    const auto rec = RunItem(a, items[3], {}, cfg, "baseline18");
    CHECK(rec.failure == FailureReason::kAdapterError);
  }
}
