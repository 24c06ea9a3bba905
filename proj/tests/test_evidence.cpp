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

#include <random>

#include "commands.hpp"
#include "doctest.h"
#include "evidence.hpp"
#include "test_util.hpp"

using namespace selgate;
using namespace selgate::evidence;

TEST_CASE("uniform timestamps") {
  const auto t = UniformTimestamps(12.0, 12);
  REQUIRE(t.size() == 12);
  for (int i = 0; i < 12; ++i) CHECK(t[i] == doctest::Approx(i + 0.5).epsilon(1e-12));
  CHECK(UniformTimestamps(76.5, 12).front() == doctest::Approx(3.1875).epsilon(1e-12));
  CHECK(UniformTimestamps(10.0, 0).empty());
  CHECK_THROWS_AS(UniformTimestamps(0.0, 3), Error);
  CHECK_THROWS_AS(UniformTimestamps(-1.0, 3), Error);
  CHECK_THROWS_AS(UniformTimestamps(10.0, -1), Error);
}

TEST_CASE("zoom timestamps use the literal 0.33 window") {
  const auto z = ZoomTimestamps(12.0, 6);
  REQUIRE(z.size() == 6);
  CHECK(z[0] == doctest::Approx(4.29).epsilon(1e-12));
  CHECK(z[5] == doctest::Approx(7.59).epsilon(1e-12));
  CHECK(ZoomTimestamps(12.0, 0).empty());
}

TEST_CASE("dedup merge keeps the earlier of a close pair") {
  CHECK(DedupMerge({1.0}, {1.08}) == std::vector<double>{1.0});
  CHECK(DedupMerge({1.0}, {1.2}) == std::vector<double>{1.0, 1.2});
  CHECK(DedupMerge({}, {}).empty());
  CHECK(DedupMerge({1.0, 1.1, 1.2, 1.3}, {}) == std::vector<double>{1.0, 1.2});
}

TEST_CASE("condition plans") {
  const auto sparse = BuildPlan("v", 60.0, ConditionByName("sparse6"));
  REQUIRE(sparse.timestamps.size() == 6);
  for (double t : sparse.timestamps) {
    for (double z : ZoomTimestamps(60.0, 6)) CHECK(std::fabs(t - z) > 1e-9);
  }
  for (double t : BuildPlan("v", 60.0, ConditionByName("earlyhalf6")).timestamps) CHECK(t <= 30.0);

  // Hand enumeration: 0.5..11.5 merged with 4.29 4.95 5.61 6.27 6.93 7.59;
  // 5.61 follows 5.5 and 7.59 follows 7.5 too closely.
  const auto base = BuildPlan("v", 12.0, ConditionByName("baseline18"));
  const std::vector<double> expected = {0.5, 1.5, 2.5, 3.5, 4.29, 4.5, 4.95, 5.5,
                                        6.27, 6.5, 6.93, 7.5, 8.5, 9.5, 10.5, 11.5};
  REQUIRE(base.timestamps.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(base.timestamps[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  CHECK_THROWS_AS(ConditionByName("nope"), Error);
}

TEST_CASE("plan invariants over random durations") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dur(0.2, 600.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double T = dur(rng);
    for (const auto& c : KnownConditions()) {
      const auto p = BuildPlan("v", T, c);
      CHECK(p == BuildPlan("v", T, c));
      for (std::size_t i = 0; i < p.timestamps.size(); ++i) {
        CHECK(p.timestamps[i] >= 0.0);
        CHECK(p.timestamps[i] <= T);
        if (i > 0) CHECK(p.timestamps[i] - p.timestamps[i - 1] > kMinGapSeconds);
      }
    }
    const auto early = BuildPlan("v", T, ConditionByName("earlyhalf6")).timestamps;
    const auto late = BuildPlan("v", T, ConditionByName("latehalf6")).timestamps;
    const auto full = UniformTimestamps(T, 12);
    if (T >= 12 * 0.2) {  // below this the halves themselves collapse under dedup
      REQUIRE(early.size() == 6);
      REQUIRE(late.size() == 6);
      for (int i = 0; i < 6; ++i) {
        CHECK(early[i] < T / 2);
        CHECK(late[i] > T / 2);
        CHECK(early[i] == doctest::Approx(full[i]).epsilon(1e-12));
        CHECK(late[i] == doctest::Approx(full[6 + i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("manifest serialization round trip") {
  Manifest m;
  m.plan = BuildPlan("vid 1", 12.0, ConditionByName("baseline18"));
  m.jpeg_quality = 85;
  m.decoder = "dec 1";
  for (std::size_t i = 0; i < m.plan.timestamps.size(); ++i) {
    m.frames.push_back({static_cast<int>(i), m.plan.timestamps[i], FrameFileName(static_cast<int>(i)),
                        std::string(64, 'a'), 910, 512});
  }
  const auto text = SerializeManifest(m);
  CHECK(ParseManifest(text) == m);
  CHECK(SerializeManifest(ParseManifest(text)) == text);
  CHECK_THROWS_AS(ParseManifest("{}"), Error);
}

TEST_CASE("jpeg dimensions") {
  // SOI, APP0 (len 4), SOF0 with height 0x0200 and width 0x0390.
  const std::string jpeg("\xFF\xD8\xFF\xE0\x00\x04\x00\x00\xFF\xC0\x00\x0B\x08\x02\x00\x03\x90\x01\x01\x11\x00", 21);
  const auto d = JpegDimensions(jpeg);
  REQUIRE(d);
  CHECK(d->first == 0x390);
  CHECK(d->second == 0x200);
  CHECK_FALSE(JpegDimensions("not a jpeg"));
  CHECK_FALSE(JpegDimensions(std::string("\xFF\xD8\xFF\xD9", 4)));
}

TEST_CASE("empty manifest verifies vacuously") {
  testutil::TempDir dir;
  const auto r = VerifyManifest(Manifest{}, dir.path());
  CHECK(r.ok);
  CHECK(r.entries.empty());
}

TEST_CASE("extraction through the reference decoder") {
  testutil::TempDir dir;
  const auto video = dir / "clip.avi";
  testutil::SynthVideo(video, 4.0, 3);
  const auto decoder = commands::DecoderFor(SG_DECODE);
  const double T = ProbeDuration(decoder, video);
  CHECK(T == doctest::Approx(4.0).epsilon(1e-6));

  const auto plan = BuildPlan("clip", T, ConditionByName("sparse6"));
  const auto m1 = ExtractFrames(plan, 85, video, decoder, dir / "a");
  REQUIRE(m1.frames.size() == 6);
  for (const auto& f : m1.frames) {
    CHECK(f.sha256.size() == 64);
    CHECK(std::min(f.width, f.height) == kShortSide);
  }
  CHECK(fs::exists(dir / "a" / kManifestFileName));

  SUBCASE("rerun is byte identical") {
    ExtractFrames(plan, 85, video, decoder, dir / "b");
    CHECK(ReadFile(dir / "a" / kManifestFileName) == ReadFile(dir / "b" / kManifestFileName));
  }
  SUBCASE("verify passes untouched and flags one flipped byte") {
    CHECK(VerifyManifest(m1, dir / "a").ok);
    const auto target = dir / "a" / m1.frames[2].file;
    std::string bytes = ReadFile(target);
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x01);
    testutil::WriteText(target, bytes);
    const auto r = VerifyManifest(m1, dir / "a");
    CHECK_FALSE(r.ok);
    CHECK(r.failures() == 1);
    CHECK(r.entries[2].reason == "digest_mismatch");
  }
  SUBCASE("missing frame is a failed entry") {
    fs::remove(dir / "a" / m1.frames[0].file);
    const auto r = VerifyManifest(m1, dir / "a");
    CHECK(r.failures() == 1);
    CHECK(r.entries[0].reason == "missing");
  }
  SUBCASE("bad decoder leaves no manifest") {
    DecoderSpec bad = decoder;
    bad.frame_command = "/nonexistent/decoder {input} {timestamp} {output}";
    CHECK_THROWS_AS(ExtractFrames(plan, 85, video, bad, dir / "c"), Error);
    CHECK_FALSE(fs::exists(dir / "c" / kManifestFileName));
    DecoderSpec failing = decoder;
    failing.frame_command = "/bin/false";
    CHECK_THROWS_AS(ExtractFrames(plan, 85, video, failing, dir / "d"), Error);
    CHECK_FALSE(fs::exists(dir / "d" / kManifestFileName));
  }
}
