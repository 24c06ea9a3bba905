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

// Exercises the shared library through its public header only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <stdlib.h>
#include <unistd.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "selgate/selgate.h"

namespace fs = std::filesystem;

namespace {

struct Dir {
  Dir() {
    std::string t = (fs::temp_directory_path() / "selgate-capi-XXXXXX").string();
    REQUIRE(mkdtemp(t.data()));
    path = t;
  }
  ~Dir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path path;
};

const char* kCodes[] = {"CW", "CH", "TN", "TC", "TP", "DO", "DL", "DC"};

void WriteItems(const fs::path& p, int n) {
  std::ofstream out(p);
  for (int i = 0; i < n; ++i) {
    out << "{\"question_id\":\"q" << i << "\",\"video_id\":\"v" << i % 5 << "\",\"question\":\"why " << i
        << "\",\"options\":{\"A\":\"a\",\"B\":\"b\",\"C\":\"c\",\"D\":\"d\",\"E\":\"e\"},\"answer\":\""
        << static_cast<char>('A' + i % 5) << "\",\"category_code\":\"" << kCodes[i % 8] << "\"}\n";
  }
}

}  // namespace

TEST_CASE("version and taxonomy") {
  CHECK(std::strlen(sg_version()) > 0);
  const char* g = nullptr;
  CHECK(sg_group_of("TN", &g) == SG_OK);
  CHECK(std::string(g) == "Temporal");
  CHECK(sg_group_of("XX", &g) == SG_ERR_DATA);
  CHECK(std::string(sg_last_error()).find("XX") != std::string::npos);
  CHECK(sg_group_of(nullptr, &g) == SG_ERR_USAGE);
}

TEST_CASE("renormalize and payload parsing") {
  const double lp[5] = {std::log(0.6), std::log(0.3), std::log(0.05), std::log(0.03), std::log(0.02)};
  sg_distribution d;
  REQUIRE(sg_renormalize(lp, &d) == SG_OK);
  CHECK(d.p_max == doctest::Approx(0.6));
  CHECK(d.margin == doctest::Approx(0.3));
  CHECK(std::fabs(d.entropy_norm - 0.622) <= 1e-3);

  sg_payload p;
  REQUIRE(sg_parse_json_payload(R"({"choice":"B","confidence":1.0,"abstain":false,"evidence_span":[2,9]})", &p) == SG_OK);
  CHECK(p.ok == 1);
  CHECK(p.choice == 'B');
  CHECK(p.has_confidence == 1);
  CHECK(p.span_end == 9);
  REQUIRE(sg_parse_json_payload("I think the answer is B", &p) == SG_OK);
  CHECK(p.ok == 0);
  CHECK(std::string(p.reason) == "not_json");
}

TEST_CASE("plan buffer sizing") {
  size_t count = 0;
  double ts[32];
  REQUIRE(sg_build_plan("baseline18", 12.0, ts, 32, &count) == SG_OK);
  CHECK(count == 16);
  CHECK(ts[0] == doctest::Approx(0.5));
  CHECK(sg_build_plan("baseline18", 12.0, ts, 4, &count) == SG_ERR_USAGE);
  CHECK(count == 16);
  CHECK(sg_build_plan("nope", 12.0, ts, 32, &count) == SG_ERR_USAGE);
  CHECK(sg_build_plan("sparse6", -1.0, ts, 32, &count) == SG_ERR_DATA);
}

TEST_CASE("items, freeze, run, sweep and transfer through the C API") {
  Dir dir;
  const auto items_path = (dir.path / "items.jsonl").string();
  WriteItems(items_path, 120);

  sg_items* items = nullptr;
  CHECK(sg_items_load((dir.path / "missing.jsonl").c_str(), &items) == SG_ERR_IO);
  REQUIRE(sg_items_load(items_path.c_str(), &items) == SG_OK);
  CHECK(sg_items_count(items) == 120);

  size_t needed = 0;
  CHECK(sg_freeze_stratified(items, 10, 1, nullptr, 0, &needed) == SG_ERR_USAGE);
  std::vector<char> buf(needed);
  REQUIRE(sg_freeze_stratified(items, 10, 1, buf.data(), buf.size(), &needed) == SG_OK);
  CHECK(std::string(buf.data()).find("\"per_group_count\": 10") != std::string::npos);
  CHECK(sg_freeze_stratified(items, 1000, 1, buf.data(), buf.size(), &needed) == SG_ERR_DATA);

  const std::string adapter = std::string("'") + SG_ORACLE + "' --items '" + items_path +
                              "' --condition sparse6 --seed 5 --spread 0.3";
  sg_run_options run;
  sg_run_options_init(&run);
  run.items = items_path.c_str();
  const std::string out_dir = dir.path.string();
  run.out_dir = out_dir.c_str();
  run.condition = "sparse6";
  run.adapter = adapter.c_str();
  run.no_frames = 1;
  run.parallel = 2;
  REQUIRE_MESSAGE(sg_cmd_run(&run) == SG_OK, sg_last_error());

  const auto log_path = (dir.path / "logs" / "sparse6-json.jsonl").string();
  sg_log* log = nullptr;
  REQUIRE(sg_log_load(log_path.c_str(), &log) == SG_OK);
  CHECK(sg_log_count(log) == 120);

  sg_sweep_point pts[25];
  size_t count = 0;
  REQUIRE(sg_sweep(log, items, nullptr, 0, 0, SG_SIGNAL_AUTO, pts, 25, &count) == SG_OK);
  REQUIRE(count == 25);
  for (size_t i = 0; i < count; ++i) CHECK(pts[i].coverage + pts[i].abstention == 1.0);
  CHECK(sg_sweep(log, items, nullptr, 0, 0, SG_SIGNAL_AUTO, pts, 3, &count) == SG_ERR_USAGE);

  sg_transfer_result tr;
  CHECK(sg_threshold_transfer(pts, 25, pts, 25, SG_FIXED_COVERAGE, 0.5, &tr) == SG_OK);
  CHECK(std::fabs(tr.target.coverage - 0.5) <= 1e-9);

  sg_sweep_options sw;
  sg_sweep_options_init(&sw);
  sw.log = log_path.c_str();
  sw.items = items_path.c_str();
  sw.out_dir = out_dir.c_str();
  REQUIRE_MESSAGE(sg_cmd_sweep(&sw) == SG_OK, sg_last_error());
  CHECK(fs::exists(dir.path / "reports" / "sparse6-json" / "sweep_results.csv"));

  sg_log_free(log);
  sg_items_free(items);
}
