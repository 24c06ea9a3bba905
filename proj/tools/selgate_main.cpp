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

// selgate: command-line front end over the C library.

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "selgate/selgate.h"

namespace {

const char* Opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

// selgate-decode next to this executable, else whatever PATH finds.
std::string DefaultDecoder() {
  std::error_code ec;
  const auto self = std::filesystem::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    const auto candidate = self.parent_path() / "selgate-decode";
    if (std::filesystem::exists(candidate)) return candidate.string();
  }
  return "selgate-decode";
}

// Exit codes: 0 ok, 1 usage, 2 data, 3 adapter. File-system trouble reports
// as a data error; anything unexpected as 70.
int Finish(sg_status status) {
  if (status == SG_OK) return 0;
  std::cerr << "selgate: error: " << sg_last_error() << "\n";
  switch (status) {
    case SG_ERR_USAGE: return 1;
    case SG_ERR_DATA:
    case SG_ERR_IO: return 2;
    case SG_ERR_ADAPTER: return 3;
    default: return 70;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"selgate: confidence-gated selective prediction harness"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(sg_version()));

  // global flags
  std::uint64_t seed = 0;
  int parallel = 1;
  std::string adapter, grid, out_dir = ".";
  long min_n = 50;
  double epsilon = 17.0 / 24.0;
  app.add_option("--seed", seed, "Seed for every random choice");
  app.add_option("--parallel", parallel, "Adapter processes for run")->check(CLI::Range(1, 256));
  app.add_option("--adapter", adapter, "Adapter command line (overrides WB_ADAPTER_CMD)");
  app.add_option("--grid", grid, "Threshold grid: point count or comma list (default i/24)");
  app.add_option("--min-n", min_n, "Accepted count below which risk/ECE are blank (0 disables)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--epsilon", epsilon, "Operating threshold for reliability and per-group tables")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--out-dir", out_dir, "Root of packets/, logs/ and reports/");

  std::string items, ids, videos, condition, decoder = DefaultDecoder(), out;
  std::size_t per_group = 100;
  auto* freeze = app.add_subcommand("freeze", "Freeze a stratified item list");
  freeze->add_option("--items", items, "items.jsonl")->required();
  freeze->add_option("--per-group", per_group, "Items per category group");
  freeze->add_option("--out", out, "Output item_ids.json")->required();

  auto* plan = app.add_subcommand("plan", "Build evidence packets for one condition");
  plan->add_option("--items", items, "items.jsonl")->required();
  plan->add_option("--ids", ids, "Frozen item list");
  plan->add_option("--videos", videos, "Directory of <video_id>.* files")->required();
  plan->add_option("--condition", condition, "Evidence condition")->required();
  plan->add_option("--decoder", decoder, "Decoder executable");

  auto* verify = app.add_subcommand("extract-verify", "Re-hash every packet against its manifest");
  verify->add_option("--condition", condition, "Only this condition");

  std::string mode = "json", run_id, prompt_version = "v1";
  bool no_frames = false;
  double timeout_s = 300.0;
  auto* run = app.add_subcommand("run", "Query the adapter for every item");
  run->add_option("--items", items, "items.jsonl")->required();
  run->add_option("--ids", ids, "Frozen item list");
  run->add_option("--condition", condition, "Evidence condition")->required();
  run->add_option("--mode", mode, "json or letter");
  run->add_option("--run-id", run_id, "Log name (default <condition>-<mode>)");
  run->add_option("--prompt-version", prompt_version, "Prompt version passed to the adapter");
  run->add_flag("--no-frames", no_frames, "Send requests without frame references");
  run->add_option("--timeout", timeout_s, "Seconds to wait for each response");

  std::string log, name, signal = "auto";
  auto* sweep = app.add_subcommand("sweep", "Risk-coverage sweep of one log");
  sweep->add_option("--log", log, "Predictions log")->required();
  sweep->add_option("--items", items, "items.jsonl")->required();
  sweep->add_option("--name", name, "Report name (default log stem)");
  sweep->add_option("--signal", signal, "auto, self or pmax");

  std::string a, b;
  auto* compare = app.add_subcommand("compare", "Compare two sweeps over the same grid");
  compare->add_option("--a", a, "Log or sweep csv")->required();
  compare->add_option("--b", b, "Log or sweep csv")->required();
  compare->add_option("--items", items, "items.jsonl (needed for logs)");
  compare->add_option("--name", name, "Report name");
  compare->add_option("--signal", signal, "auto, self or pmax");

  double tau = 0.9;
  auto* matched = app.add_subcommand("matched", "Matched-instance confidence analysis");
  matched->add_option("--a", a, "Log for condition A")->required();
  matched->add_option("--b", b, "Log for condition B")->required();
  matched->add_option("--items", items, "items.jsonl")->required();
  matched->add_option("--name", name, "Report name");
  matched->add_option("--signal", signal, "auto, self or pmax");
  matched->add_option("--tau", tau, "High-confidence cut")->check(CLI::Range(0.0, 1.0));

  std::string source, target;
  double risk = -1.0, coverage = -1.0;
  auto* transfer = app.add_subcommand("transfer", "Carry a threshold from one condition to another");
  transfer->add_option("--source", source, "Log or sweep csv")->required();
  transfer->add_option("--target", target, "Log or sweep csv")->required();
  transfer->add_option("--items", items, "items.jsonl (needed for logs)");
  transfer->add_option("--name", name, "Report name");
  transfer->add_option("--signal", signal, "auto, self or pmax");
  auto* risk_opt = transfer->add_option("--risk", risk, "Fixed-risk criterion");
  auto* cov_opt = transfer->add_option("--coverage", coverage, "Fixed-coverage criterion");
  risk_opt->excludes(cov_opt);

  std::vector<std::string> logs;
  auto* report = app.add_subcommand("report", "Full report for one or more logs");
  report->add_option("--log", logs, "Predictions log (repeatable)")->required();
  report->add_option("--items", items, "items.jsonl")->required();
  report->add_option("--name", name, "Report name (default report)");
  report->add_option("--signal", signal, "auto, self or pmax");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "selgate: " << e.what() << "\n";
    return SG_ERR_USAGE;
  }

  sg_grid_options g{Opt(grid), min_n, Opt(signal)};

  if (*freeze) {
    sg_freeze_options o;
    sg_freeze_options_init(&o);
    o.items = items.c_str();
    o.per_group = per_group;
    o.seed = seed;
    o.out = out.c_str();
    return Finish(sg_cmd_freeze(&o));
  }
  if (*plan) {
    sg_plan_options o;
    sg_plan_options_init(&o);
    o.items = items.c_str();
    o.ids = Opt(ids);
    o.videos = videos.c_str();
    o.condition = condition.c_str();
    o.out_dir = out_dir.c_str();
    o.decoder = decoder.c_str();
    return Finish(sg_cmd_plan(&o));
  }
  if (*verify) {
    sg_verify_options o;
    sg_verify_options_init(&o);
    o.out_dir = out_dir.c_str();
    o.condition = Opt(condition);
    return Finish(sg_cmd_extract_verify(&o));
  }
  if (*run) {
    sg_run_options o;
    sg_run_options_init(&o);
    o.items = items.c_str();
    o.ids = Opt(ids);
    o.out_dir = out_dir.c_str();
    o.condition = condition.c_str();
    o.mode = mode.c_str();
    o.adapter = Opt(adapter);
    o.run_id = Opt(run_id);
    o.prompt_version = prompt_version.c_str();
    o.parallel = parallel;
    o.no_frames = no_frames ? 1 : 0;
    o.timeout_s = timeout_s;
    return Finish(sg_cmd_run(&o));
  }
  if (*sweep) {
    sg_sweep_options o;
    sg_sweep_options_init(&o);
    o.log = log.c_str();
    o.items = items.c_str();
    o.out_dir = out_dir.c_str();
    o.name = Opt(name);
    o.grid = g;
    o.epsilon = epsilon;
    return Finish(sg_cmd_sweep(&o));
  }
  if (*compare) {
    sg_compare_options o;
    sg_compare_options_init(&o);
    o.a = a.c_str();
    o.b = b.c_str();
    o.items = Opt(items);
    o.out_dir = out_dir.c_str();
    o.name = Opt(name);
    o.grid = g;
    return Finish(sg_cmd_compare(&o));
  }
  if (*matched) {
    sg_matched_options o;
    sg_matched_options_init(&o);
    o.a = a.c_str();
    o.b = b.c_str();
    o.items = items.c_str();
    o.out_dir = out_dir.c_str();
    o.name = Opt(name);
    o.signal = signal.c_str();
    o.tau = tau;
    return Finish(sg_cmd_matched(&o));
  }
  if (*transfer) {
    if (risk_opt->count() == 0 && cov_opt->count() == 0) {
      std::cerr << "selgate: transfer needs --risk or --coverage\n";
      return SG_ERR_USAGE;
    }
    sg_transfer_options o;
    sg_transfer_options_init(&o);
    o.source = source.c_str();
    o.target = target.c_str();
    o.items = Opt(items);
    o.out_dir = out_dir.c_str();
    o.name = Opt(name);
    o.grid = g;
    o.criterion = risk_opt->count() ? "risk" : "coverage";
    o.value = risk_opt->count() ? risk : coverage;
    return Finish(sg_cmd_transfer(&o));
  }
  if (*report) {
    std::vector<const char*> ptrs;
    for (const auto& l : logs) ptrs.push_back(l.c_str());
    sg_report_options o;
    sg_report_options_init(&o);
    o.logs = ptrs.data();
    o.n_logs = ptrs.size();
    o.items = items.c_str();
    o.out_dir = out_dir.c_str();
    o.name = Opt(name);
    o.grid = g;
    o.epsilon = epsilon;
    return Finish(sg_cmd_report(&o));
  }
  return SG_ERR_USAGE;
}
