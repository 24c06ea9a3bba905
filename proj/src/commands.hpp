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

// Pipeline commands behind the CLI. Each one throws selgate::Error on failure
// (the kind decides the exit code) and prints a short summary on stdout.
//
// Output tree under out_dir:
//   packets/<condition>/<video_id>/   frames + manifest.json
//   logs/<run_id>.jsonl               predictions log
//   logs/<run_id>.runs.jsonl          one run manifest per invocation
//   reports/<name>/                   csv, svg, summary.txt

#ifndef SELGATE_COMMANDS_HPP_
#define SELGATE_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "evidence.hpp"
#include "metrics.hpp"

namespace selgate::commands {

namespace fs = std::filesystem;

// "" -> i/24 grid; "N" -> N evenly spaced points on [0,1]; otherwise a
// comma-separated list.
std::vector<double> ResolveGrid(std::string_view spec);

// Decoder commands for a selgate-decode style executable.
evidence::DecoderSpec DecoderFor(const std::string& executable);

// The digest recorded in run manifests: SHA-256 of the ids, one per line.
std::string ItemListDigest(const std::vector<std::string>& ids);

struct FreezeOptions {
  fs::path items;
  std::size_t per_group = 100;
  std::uint64_t seed = 0;
  fs::path out;
};
void Freeze(const FreezeOptions& o);

struct PlanOptions {
  fs::path items;
  fs::path ids;  // optional frozen list
  fs::path videos;
  std::string condition;
  fs::path out_dir = ".";
  std::string decoder = "selgate-decode";
};
void Plan(const PlanOptions& o);

struct VerifyOptions {
  fs::path out_dir = ".";
  std::string condition;  // empty: every condition present
};
void ExtractVerify(const VerifyOptions& o);

struct RunOptions {
  fs::path items;
  fs::path ids;
  fs::path out_dir = ".";
  std::string condition;
  std::string mode = "json";
  std::string adapter;  // empty: WB_ADAPTER_CMD
  std::string run_id;   // empty: <condition>-<mode>
  std::string prompt_version = "v1";
  int parallel = 1;
  bool no_frames = false;
  double timeout_s = 300.0;
};
void Run(const RunOptions& o);

struct GridOptions {
  std::string grid;
  long min_n = metrics::kDefaultMinN;
  std::string signal = "auto";
};

struct SweepOptions {
  fs::path log;
  fs::path items;
  fs::path out_dir = ".";
  std::string name;  // empty: log file stem
  GridOptions grid;
  double epsilon = 17.0 / 24.0;  // reliability diagram and per-group table
};
void Sweep(const SweepOptions& o);

// Inputs to compare and transfer may be predictions logs (need items) or
// sweep_results.csv files (extension .csv).
struct CompareOptions {
  fs::path a;
  fs::path b;
  fs::path items;
  fs::path out_dir = ".";
  std::string name;
  GridOptions grid;
};
void Compare(const CompareOptions& o);

struct MatchedOptions {
  fs::path a;
  fs::path b;
  fs::path items;
  fs::path out_dir = ".";
  std::string name;
  std::string signal = "auto";
  double tau = 0.9;
};
void Matched(const MatchedOptions& o);

struct TransferOptions {
  fs::path source;
  fs::path target;
  fs::path items;
  fs::path out_dir = ".";
  std::string name;
  GridOptions grid;
  std::string criterion = "risk";  // or "coverage"
  double value = 0.10;
};
void Transfer(const TransferOptions& o);

struct ReportOptions {
  std::vector<fs::path> logs;
  fs::path items;
  fs::path out_dir = ".";
  std::string name = "report";
  GridOptions grid;
  double epsilon = 17.0 / 24.0;
};
void Report(const ReportOptions& o);

}  // namespace selgate::commands

#endif  // SELGATE_COMMANDS_HPP_
