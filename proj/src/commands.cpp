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

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <thread>
#include <unordered_map>

#include "json.hpp"

#include "corpus.hpp"
#include "csv.hpp"
#include "gateway.hpp"
#include "plot.hpp"
#include "shift.hpp"

namespace selgate::commands {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string Fixed(double v, int digits = 4) {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);  // no "-0.0000"
  return s;
}

// Pads to `width`, left-aligned.
std::string Pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

ordered_json Num(double v) { return std::isnan(v) ? ordered_json(nullptr) : ordered_json(v); }

std::string Quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::vector<corpus::Item> LoadSelected(const fs::path& items_path, const fs::path& ids_path) {
  if (items_path.empty()) ThrowUsage("--items is required");
  auto items = corpus::LoadItems(items_path);
  if (ids_path.empty()) return items;
  return corpus::SelectItems(items, corpus::LoadFrozenList(ids_path).ids);
}

corpus::AnswerKey LoadKey(const fs::path& items_path) {
  if (items_path.empty()) ThrowUsage("--items is required");
  return corpus::AnswerKey(corpus::LoadItems(items_path));
}

void CheckName(const std::string& name, std::string_view what) {
  if (name.empty() || name == "." || name == ".." || name.find('/') != std::string::npos) {
    ThrowUsage("invalid " + std::string(what) + " '" + name + "'");
  }
}

void CheckEpsilon(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) ThrowUsage("--epsilon must be in [0,1]");
}

fs::path ReportDir(const fs::path& out_dir, const std::string& name) {
  CheckName(name, "report name");
  return out_dir / "reports" / name;
}

std::optional<fs::path> FindVideo(const fs::path& dir, const std::string& video_id) {
  std::error_code ec;
  std::vector<fs::path> hits;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    if (it->is_regular_file() && it->path().stem() == video_id) hits.push_back(it->path());
  }
  if (hits.empty()) return std::nullopt;
  std::sort(hits.begin(), hits.end());
  return hits.front();
}

std::string Stem(const fs::path& p) { return p.stem().string(); }

std::vector<metrics::SweepPoint> LoadCurve(const fs::path& path, const fs::path& items,
                                           const GridOptions& g) {
  if (path.extension() == ".csv") return csv::LoadSweep(path);
  const auto key = LoadKey(items);
  return metrics::Sweep(gateway::LoadLog(path), key, ResolveGrid(g.grid),
                        {metrics::ParseSignal(g.signal), g.min_n});
}

void CheckSameGrid(const std::vector<metrics::SweepPoint>& a, const std::vector<metrics::SweepPoint>& b) {
  bool same = a.size() == b.size();
  for (std::size_t i = 0; same && i < a.size(); ++i) same = a[i].epsilon == b[i].epsilon;
  if (!same) ThrowData("mismatched grids: the two curves were swept over different thresholds");
}

std::string SweepTable(const std::vector<metrics::SweepPoint>& pts) {
  std::string s = "  epsilon  coverage  risk    acc_cond  ece     n_accepted\n";
  for (const auto& p : pts) {
    s += "  " + Pad(Fixed(p.epsilon), 9) + Pad(Fixed(p.coverage), 10) + Pad(Fixed(p.risk), 8) +
         Pad(Fixed(p.acc_cond), 10) + Pad(Fixed(p.ece), 8) + std::to_string(p.n_accepted) + "\n";
  }
  return s;
}

std::string LogOverview(const std::vector<gateway::Record>& records) {
  std::map<std::string, long> reasons;
  long ok = 0, retried = 0;
  for (const auto& r : records) {
    if (r.parse_ok) ++ok;
    else reasons[std::string(gateway::ReasonName(r.failure))]++;
    if (r.retry_used) ++retried;
  }
  std::string s = "  records: " + std::to_string(records.size()) + ", parsed: " + std::to_string(ok) +
                  ", retried: " + std::to_string(retried) + "\n";
  for (const auto& [name, n] : reasons) s += "  failure " + name + ": " + std::to_string(n) + "\n";
  return s;
}

// Everything `sweep` emits for one log into `dir`.
std::vector<metrics::SweepPoint> WriteSweepBundle(const fs::path& dir, const fs::path& log_path,
                                                  const corpus::AnswerKey& key,
                                                  const GridOptions& g, double epsilon,
                                                  const std::string& title, std::string* summary) {
  const auto grid = ResolveGrid(g.grid);
  const auto signal = metrics::ParseSignal(g.signal);
  if (g.min_n < 0) ThrowUsage("--min-n must be >= 0");
  const auto records = gateway::LoadLog(log_path);
  const auto points = metrics::Sweep(records, key, grid, {signal, g.min_n});
  const auto rel = metrics::ReliabilityAt(records, key, epsilon, signal);
  const auto groups = metrics::PerGroupTable(records, key, {0.0, epsilon}, signal);

  WriteFileAtomic(dir / "sweep_results.csv", csv::WriteSweep(points));
  WriteFileAtomic(dir / "per_group.csv", csv::WriteGroupTable(groups));
  WriteFileAtomic(dir / "reliability.csv", csv::WriteReliability(rel));
  WriteFileAtomic(dir / "risk_coverage.svg", plot::RiskCoverage({{title, points}}, "Risk-coverage: " + title));
  WriteFileAtomic(dir / "ece_threshold.svg", plot::EceVsThreshold({{title, points}}, "ECE vs threshold: " + title));
  WriteFileAtomic(dir / "reliability.svg", plot::ReliabilityDiagram(rel, epsilon, "Reliability: " + title));

  std::string s = "log: " + log_path.string() + "\n";
  s += LogOverview(records);
  s += "  signal: " + g.signal + ", min-n: " + std::to_string(g.min_n) + "\n";
  s += SweepTable(points);
  s += "  per group (epsilon 0 and " + Fixed(epsilon) + "):\n";
  for (const auto& r : groups) {
    s += "    " + Pad(std::string(corpus::GroupName(r.group)), 13) + Pad(Fixed(r.epsilon), 8) +
         "acc " + Pad(Fixed(r.acc_cond), 8) + "coverage " + Pad(Fixed(r.coverage), 8) + "n " +
         std::to_string(r.n_accepted) + "/" + std::to_string(r.n) + "\n";
  }
  s += "  ECE at epsilon " + Fixed(epsilon) + ": " + Fixed(rel.ece) + " over " + std::to_string(rel.n) + " accepted\n";
  *summary += s;
  return points;
}

}  // namespace

std::vector<double> ResolveGrid(std::string_view spec) {
  const std::string s = Trim(spec);
  if (s.empty()) return metrics::DefaultGrid();
  if (s.find(',') == std::string::npos && s.find('.') == std::string::npos) {
    const auto n = ParseDouble(s);
    if (!n || *n < 1 || *n != std::floor(*n) || *n > 100000) ThrowUsage("bad --grid '" + s + "'");
    return metrics::EvenGrid(static_cast<int>(*n));
  }
  std::vector<double> grid;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    const auto v = ParseDouble(Trim(std::string_view(s).substr(start, comma - start)));
    if (!v) ThrowUsage("bad --grid value in '" + s + "'");
    grid.push_back(*v);
    start = comma + 1;
  }
  metrics::ValidateGrid(grid);
  return grid;
}

evidence::DecoderSpec DecoderFor(const std::string& executable) {
  const std::string exe = Quote(executable);
  return {exe + " frame {input} {timestamp} {quality} {short_side} {output}",
          exe + " probe {input}", exe + " version"};
}

std::string ItemListDigest(const std::vector<std::string>& ids) {
  std::string text;
  for (const auto& id : ids) text += id + "\n";
  return Sha256Hex(text);
}

void Freeze(const FreezeOptions& o) {
  if (o.out.empty()) ThrowUsage("--out is required");
  const auto items = corpus::LoadItems(o.items);
  const auto list = corpus::FreezeStratified(items, o.per_group, o.seed);
  WriteFileAtomic(o.out, corpus::SerializeFrozenList(list));
  std::cout << "froze " << list.ids.size() << " ids (" << o.per_group << " per group, seed " << o.seed
            << ") -> " << o.out.string() << "\n";
}

void Plan(const PlanOptions& o) {
  const auto& cond = evidence::ConditionByName(o.condition);
  if (o.videos.empty()) ThrowUsage("--videos is required");
  const auto items = LoadSelected(o.items, o.ids);
  std::vector<std::string> videos;
  std::set<std::string> seen;
  for (const auto& it : items) {
    if (seen.insert(it.video_id).second) videos.push_back(it.video_id);
  }

  const auto decoder = DecoderFor(o.decoder);
  const std::string identity = evidence::DecoderIdentity(decoder);
  long extracted = 0, verified = 0, frames = 0;
  std::vector<std::string> failed;
  for (const auto& vid : videos) {
    try {
      CheckName(vid, "video_id");
      const fs::path dir = o.out_dir / "packets" / cond.name / vid;
      const fs::path manifest_path = dir / evidence::kManifestFileName;
      if (fs::exists(manifest_path)) {
        try {
          const auto m = evidence::LoadManifest(manifest_path);
          if (m.plan.video_id == vid && m.plan.condition == cond.name &&
              m.jpeg_quality == cond.jpeg_quality && m.decoder == identity &&
              evidence::VerifyManifest(m, dir).ok) {
            ++verified;
            frames += static_cast<long>(m.frames.size());
            continue;
          }
        } catch (const Error&) {
          // unreadable manifest: fall through and rebuild
        }
      }
      const auto video = FindVideo(o.videos, vid);
      if (!video) ThrowData("video '" + vid + "' not found in " + o.videos.string());
      const double duration = evidence::ProbeDuration(decoder, *video);
      const auto plan = evidence::BuildPlan(vid, duration, cond);
      std::error_code ec;
      fs::remove_all(dir, ec);
      const auto m = evidence::ExtractFrames(plan, cond.jpeg_quality, *video, decoder, dir);
      ++extracted;
      frames += static_cast<long>(m.frames.size());
    } catch (const Error& e) {
      failed.push_back(vid);
      std::cerr << "plan: video " << vid << ": " << e.what() << "\n";
    }
  }
  std::cout << "plan " << cond.name << ": " << videos.size() << " videos, " << extracted << " extracted, "
            << verified << " verified, " << failed.size() << " failed, " << frames << " frames -> "
            << (o.out_dir / "packets" / cond.name).string() << "\n";
  if (!failed.empty()) {
    std::string ids;
    for (const auto& v : failed) ids += (ids.empty() ? "" : ", ") + v;
    ThrowData(std::to_string(failed.size()) + " video(s) failed: " + ids);
  }
}

void ExtractVerify(const VerifyOptions& o) {
  const fs::path root = o.out_dir / "packets";
  std::vector<fs::path> cond_dirs;
  if (!o.condition.empty()) {
    cond_dirs.push_back(root / evidence::ConditionByName(o.condition).name);
  } else {
    std::error_code ec;
    for (fs::directory_iterator it(root, ec), end; !ec && it != end; it.increment(ec)) {
      if (it->is_directory()) cond_dirs.push_back(it->path());
    }
  }
  std::sort(cond_dirs.begin(), cond_dirs.end());
  long manifests = 0, frames = 0, bad = 0;
  for (const auto& cdir : cond_dirs) {
    std::vector<fs::path> vdirs;
    std::error_code ec;
    for (fs::directory_iterator it(cdir, ec), end; !ec && it != end; it.increment(ec)) {
      if (it->is_directory()) vdirs.push_back(it->path());
    }
    std::sort(vdirs.begin(), vdirs.end());
    for (const auto& vdir : vdirs) {
      const auto where = cdir.filename().string() + "/" + vdir.filename().string();
      const auto mpath = vdir / evidence::kManifestFileName;
      if (!fs::exists(mpath)) {
        ++bad;
        std::cout << where << ": missing manifest\n";
        continue;
      }
      ++manifests;
      try {
        const auto m = evidence::LoadManifest(mpath);
        if (m.plan.video_id != vdir.filename().string() || m.plan.condition != cdir.filename().string()) {
          ++bad;
          std::cout << where << ": manifest belongs to " << m.plan.condition << "/" << m.plan.video_id << "\n";
        }
        const auto report = evidence::VerifyManifest(m, vdir);
        frames += static_cast<long>(report.entries.size());
        for (const auto& e : report.entries) {
          if (e.ok) continue;
          ++bad;
          std::cout << where << "/" << e.file << ": " << e.reason << "\n";
        }
      } catch (const Error& e) {
        ++bad;
        std::cout << where << ": " << e.what() << "\n";
      }
    }
  }
  std::cout << "verified " << manifests << " manifests, " << frames << " frames, " << bad << " problems\n";
  if (manifests == 0) ThrowData("no manifests found under " + root.string());
  if (bad > 0) ThrowData(std::to_string(bad) + " verification problem(s)");
}

void Run(const RunOptions& o) {
  const auto mode = gateway::ParseMode(o.mode);
  const auto& cond = evidence::ConditionByName(o.condition);
  std::string adapter_cmd = o.adapter;
  if (adapter_cmd.empty()) {
    if (const char* env = std::getenv("WB_ADAPTER_CMD")) adapter_cmd = env;
  }
  if (Trim(adapter_cmd).empty()) ThrowUsage("no adapter command: pass --adapter or set WB_ADAPTER_CMD");
  if (o.parallel < 1 || o.parallel > 256) ThrowUsage("--parallel must be in [1,256]");
  if (!(o.timeout_s > 0.0)) ThrowUsage("timeout must be positive");
  gateway::GenerationConfig config;
  config.mode = mode;
  config.prompt_version = o.prompt_version;
  config.Validate();

  const auto items = LoadSelected(o.items, o.ids);
  std::vector<std::string> ids;
  for (const auto& it : items) ids.push_back(it.question_id);
  const std::string run_id = o.run_id.empty() ? cond.name + "-" + std::string(gateway::ModeName(mode)) : o.run_id;
  CheckName(run_id, "run id");

  // Frame references per video from the packet manifests.
  std::unordered_map<std::string, std::vector<gateway::FrameRef>> frames;
  if (!o.no_frames) {
    for (const auto& it : items) {
      if (frames.count(it.video_id)) continue;
      const fs::path dir = fs::absolute(o.out_dir / "packets" / cond.name / it.video_id);
      const fs::path mpath = dir / evidence::kManifestFileName;
      if (!fs::exists(mpath)) {
        ThrowData("no evidence packet for video '" + it.video_id + "' under " + cond.name + " (run plan first)");
      }
      const auto m = evidence::LoadManifest(mpath);
      std::vector<gateway::FrameRef> refs;
      for (const auto& f : m.frames) refs.push_back({(dir / f.file).lexically_normal().string(), f.timestamp});
      frames.emplace(it.video_id, std::move(refs));
    }
  }

  const fs::path log_path = o.out_dir / "logs" / (run_id + ".jsonl");
  const fs::path runs_path = o.out_dir / "logs" / (run_id + ".runs.jsonl");
  std::map<std::string, gateway::Record> done;
  {
    std::set<std::string> known(ids.begin(), ids.end());
    std::vector<gateway::Record> previous;
    if (fs::exists(log_path)) previous = gateway::LoadLog(log_path);
    for (auto& r : previous) {
      if (!known.count(r.question_id)) {
        ThrowData("log " + log_path.string() + " has id '" + r.question_id + "' outside the item list");
      }
      done[r.question_id] = std::move(r);  // latest line wins
    }
    // Normalise the file so appends never land after a torn line.
    std::string text;
    for (const auto& id : ids) {
      if (auto f = done.find(id); f != done.end()) text += gateway::SerializeRecord(f->second) + "\n";
    }
    WriteFileAtomic(log_path, text);
  }

  std::vector<const corpus::Item*> pending;
  for (const auto& it : items) {
    auto f = done.find(it.question_id);
    if (f == done.end() || f->second.failure == gateway::FailureReason::kAdapterError) pending.push_back(&it);
  }
  const long skipped = static_cast<long>(items.size() - pending.size());

  const std::string started_at = UtcTimestamp();
  std::ofstream log(log_path, std::ios::app | std::ios::binary);
  if (!log) ThrowIo("cannot append to " + log_path.string());

  std::mutex mu;
  std::condition_variable cv;
  std::vector<std::optional<gateway::Record>> slots(pending.size());
  std::size_t next = 0;
  bool crashed = false;
  std::string crash_detail;
  const auto timeout = std::chrono::milliseconds(static_cast<long long>(o.timeout_s * 1000.0));
  const std::vector<gateway::FrameRef> no_frames;

  const auto worker = [&] {
    std::optional<std::size_t> held;
    try {
      gateway::ProcessAdapter adapter(adapter_cmd, timeout);
      while (true) {
        {
          std::lock_guard<std::mutex> lock(mu);
          if (crashed || next >= pending.size()) return;
          held = next++;
        }
        const auto& item = *pending[*held];
        const auto fit = frames.find(item.video_id);
        auto rec = gateway::RunItem(adapter, item, fit == frames.end() ? no_frames : fit->second, config, cond.name);
        std::lock_guard<std::mutex> lock(mu);
        if (!adapter.healthy() && !crashed) {
          crashed = true;
          crash_detail = "adapter stopped responding at " + item.question_id;
        }
        slots[*held] = std::move(rec);
        held.reset();
        cv.notify_all();
      }
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(mu);
      if (!crashed) {
        crashed = true;
        crash_detail = std::string("adapter failed: ") + e.what();
      }
      if (held) {
        gateway::Record rec;
        rec.question_id = pending[*held]->question_id;
        rec.condition = cond.name;
        rec.mode = mode;
        rec.failure = gateway::FailureReason::kAdapterError;
        rec.failure_detail = crash_detail;
        rec.timestamp = UtcTimestamp();
        slots[*held] = std::move(rec);
      }
      cv.notify_all();
    }
  };
  const int n_workers = std::min<int>(o.parallel, std::max<int>(1, static_cast<int>(pending.size())));
  std::vector<std::thread> threads;
  if (!pending.empty()) {
    for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker);
  }

  std::vector<std::pair<std::string, double>> latencies;
  std::string model_id;
  long failed = 0, adapter_errors = 0;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    gateway::Record rec;
    {
      std::unique_lock<std::mutex> lock(mu);
      cv.wait(lock, [&] { return slots[i].has_value() || (crashed && i >= next); });
      if (slots[i]) {
        rec = std::move(*slots[i]);
      } else {
        rec.question_id = pending[i]->question_id;
        rec.condition = cond.name;
        rec.mode = mode;
        rec.failure = gateway::FailureReason::kAdapterError;
        rec.failure_detail = "not attempted: " + crash_detail;
        rec.timestamp = UtcTimestamp();
      }
    }
    if (model_id.empty()) model_id = rec.model_id;
    if (!rec.parse_ok) ++failed;
    if (rec.failure == gateway::FailureReason::kAdapterError) ++adapter_errors;
    latencies.emplace_back(rec.question_id, rec.latency_ms);
    log << gateway::SerializeRecord(rec) << "\n";
    log.flush();
    done[rec.question_id] = std::move(rec);
  }
  for (auto& t : threads) t.join();
  log.close();

  // Final in-order rewrite: one record per id, frozen-list order.
  {
    std::string text;
    for (const auto& id : ids) {
      if (auto f = done.find(id); f != done.end()) text += gateway::SerializeRecord(f->second) + "\n";
    }
    WriteFileAtomic(log_path, text);
  }

  // Run manifest: one line per invocation.
  long invocation = 1;
  if (fs::exists(runs_path)) {
    const std::string prev = ReadFile(runs_path);
    invocation += static_cast<long>(std::count(prev.begin(), prev.end(), '\n'));
  }
  ordered_json m;
  m["run_id"] = run_id + "." + std::to_string(invocation);
  m["log"] = (run_id + ".jsonl");
  m["item_list_digest"] = ItemListDigest(ids);
  m["item_list"] = o.ids.empty() ? o.items.string() : o.ids.string();
  m["n_items"] = ids.size();
  m["condition"] = cond.name;
  m["mode"] = gateway::ModeName(mode);
  m["prompt_version"] = config.prompt_version;
  m["generation"] = {{"temperature", config.temperature}, {"max_tokens", config.max_tokens}};
  if (mode == gateway::Mode::kLetter) m["generation"]["logprob_top_k"] = config.logprob_top_k;
  m["adapter_command"] = adapter_cmd;
  m["parallel"] = o.parallel;
  m["frames"] = !o.no_frames;
  m["model_id"] = model_id;
  m["started_at"] = started_at;
  m["finished_at"] = UtcTimestamp();
  m["queried"] = pending.size();
  m["skipped"] = skipped;
  m["parse_failures"] = failed;
  m["adapter_errors"] = adapter_errors;
  ordered_json lat = ordered_json::array();
  for (const auto& [id, ms] : latencies) lat.push_back({{"question_id", id}, {"latency_ms", ms}});
  m["latencies"] = std::move(lat);
  {
    std::ofstream runs(runs_path, std::ios::app | std::ios::binary);
    if (!runs) ThrowIo("cannot append to " + runs_path.string());
    runs << m.dump() << "\n";
  }

  std::cout << "run " << run_id << ": " << ids.size() << " items, " << pending.size() << " queried, "
            << skipped << " already done, " << failed << " unparsed, " << adapter_errors
            << " adapter errors -> " << log_path.string() << "\n";
  if (crashed) throw Error(ErrorKind::kAdapter, crash_detail + "; rerun to resume");
}

void Sweep(const SweepOptions& o) {
  CheckEpsilon(o.epsilon);
  if (o.log.empty()) ThrowUsage("--log is required");
  const auto key = LoadKey(o.items);
  const std::string name = o.name.empty() ? Stem(o.log) : o.name;
  const auto dir = ReportDir(o.out_dir, name);
  std::string summary;
  const auto points = WriteSweepBundle(dir, o.log, key, o.grid, o.epsilon, name, &summary);
  WriteFileAtomic(dir / "summary.txt", summary);
  std::cout << "sweep " << name << ": " << points.size() << " thresholds -> "
            << (dir / "sweep_results.csv").string() << "\n";
}

void Compare(const CompareOptions& o) {
  if (o.a.empty() || o.b.empty()) ThrowUsage("compare needs two inputs");
  const auto a = LoadCurve(o.a, o.items, o.grid);
  const auto b = LoadCurve(o.b, o.items, o.grid);
  CheckSameGrid(a, b);
  const std::string na = Stem(o.a), nb = Stem(o.b);
  const std::string name = o.name.empty() ? na + "_vs_" + nb : o.name;
  const auto dir = ReportDir(o.out_dir, name);

  std::string table = "epsilon,coverage_a,risk_a,ece_a,n_a,coverage_b,risk_b,ece_b,n_b,delta_coverage,delta_risk,delta_ece\n";
  std::string summary = "compare " + na + " (a) vs " + nb + " (b)\n";
  summary += "  epsilon  cov_a   risk_a  cov_b   risk_b  d_cov    d_risk\n";
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& p = a[i];
    const auto& q = b[i];
    table += csv::Cell(p.epsilon) + ',' + csv::Cell(p.coverage) + ',' + csv::Cell(p.risk) + ',' +
             csv::Cell(p.ece) + ',' + std::to_string(p.n_accepted) + ',' + csv::Cell(q.coverage) + ',' +
             csv::Cell(q.risk) + ',' + csv::Cell(q.ece) + ',' + std::to_string(q.n_accepted) + ',' +
             csv::Cell(q.coverage - p.coverage) + ',' + csv::Cell(q.risk - p.risk) + ',' +
             csv::Cell(q.ece - p.ece) + '\n';
    summary += "  " + Pad(Fixed(p.epsilon), 9) + Pad(Fixed(p.coverage), 8) + Pad(Fixed(p.risk), 8) +
               Pad(Fixed(q.coverage), 8) + Pad(Fixed(q.risk), 8) + Pad(Fixed(q.coverage - p.coverage), 9) +
               Fixed(q.risk - p.risk) + "\n";
  }
  WriteFileAtomic(dir / "compare.csv", table);
  WriteFileAtomic(dir / "risk_coverage_compare.svg", plot::RiskCoverage({{na, a}, {nb, b}}, "Risk-coverage comparison"));
  WriteFileAtomic(dir / "ece_threshold_compare.svg", plot::EceVsThreshold({{na, a}, {nb, b}}, "ECE vs threshold"));
  WriteFileAtomic(dir / "summary.txt", summary);
  std::cout << "compare " << name << ": " << a.size() << " thresholds -> " << (dir / "compare.csv").string() << "\n";
}

void Matched(const MatchedOptions& o) {
  if (o.a.empty() || o.b.empty()) ThrowUsage("matched needs two logs");
  if (!(o.tau >= 0.0 && o.tau <= 1.0)) ThrowUsage("--tau must be in [0,1]");
  const auto signal = metrics::ParseSignal(o.signal);
  const auto key = LoadKey(o.items);
  const auto log_a = gateway::LoadLog(o.a);
  const auto log_b = gateway::LoadLog(o.b);
  for (const auto* log : {&log_a, &log_b}) {
    for (const auto& r : *log) key.At(r.question_id);
  }
  const auto pairs = shift::MatchInstances(log_a, log_b, signal);
  const std::string na = Stem(o.a), nb = Stem(o.b);
  const std::string name = o.name.empty() ? na + "_vs_" + nb : o.name;
  const auto dir = ReportDir(o.out_dir, name);

  const auto correct = [&](const gateway::Record& r) {
    return r.payload && r.payload->choice && *r.payload->choice == key.At(r.question_id).answer;
  };
  std::string lines;
  std::vector<double> conf_a, conf_b;
  for (const auto& p : pairs) {
    const double ca = *metrics::ConfidenceOf(p.a, signal);
    const double cb = *metrics::ConfidenceOf(p.b, signal);
    conf_a.push_back(ca);
    conf_b.push_back(cb);
    ordered_json j;
    j["question_id"] = p.question_id;
    j["confidence_a"] = ca;
    j["confidence_b"] = cb;
    j["correct_a"] = correct(p.a);
    j["correct_b"] = correct(p.b);
    lines += j.dump() + "\n";
  }
  WriteFileAtomic(dir / "matched_pairs.jsonl", lines);

  std::string summary = "matched " + na + " (a) vs " + nb + " (b), signal " + o.signal + "\n";
  summary += "  pairs: " + std::to_string(pairs.size()) + " (a: " + std::to_string(log_a.size()) +
             " records, b: " + std::to_string(log_b.size()) + " records)\n";
  ordered_json stats;
  stats["pairs"] = pairs.size();
  stats["signal"] = o.signal;
  stats["tau"] = o.tau;
  if (pairs.empty()) {
    std::cerr << "matched: warning: no valid pairs between " << o.a.string() << " and " << o.b.string() << "\n";
    summary += "  warning: no valid pairs\n";
  } else {
    const auto d = shift::Delta(pairs, signal);
    const auto sa = shift::Describe(conf_a);
    const auto sb = shift::Describe(conf_b);
    const auto stat_json = [](const shift::DistributionStats& s) {
      return ordered_json{{"n", s.n}, {"mean", s.mean}, {"median", s.median},
                          {"q25", s.q25}, {"q75", s.q75}, {"iqr", s.iqr}};
    };
    stats["a"] = stat_json(sa);
    stats["b"] = stat_json(sb);
    stats["delta"] = {{"mean_a", d.mean_a}, {"mean_b", d.mean_b}, {"delta_abs", d.delta_abs}, {"delta_rel", Num(d.delta_rel)}};
    for (const auto& [label, s] : {std::pair{"a", sa}, std::pair{"b", sb}}) {
      summary += std::string("  ") + label + ": mean " + Fixed(s.mean) + ", median " + Fixed(s.median) + ", q25 " +
                 Fixed(s.q25) + ", q75 " + Fixed(s.q75) + ", iqr " + Fixed(s.iqr) + "\n";
    }
    summary += "  delta: abs " + Fixed(d.delta_abs) + ", rel " + Fixed(d.delta_rel) + "\n";
  }
  // High-confidence mass over each log's valid records, not only the pairs.
  for (const auto& [label, log] : {std::pair{"a", &log_a}, std::pair{"b", &log_b}}) {
    const auto h = shift::HighConfidenceMass(*log, key, o.tau, signal);
    stats[std::string("high_conf_") + label] = {{"n", h.n}, {"n_high", h.n_high}, {"mass", Num(h.mass)}, {"error_rate", Num(h.error_rate)}};
    summary += std::string("  ") + label + ": P(conf >= " + Fixed(o.tau, 2) + ") = " + Fixed(h.mass) + " (" +
               std::to_string(h.n_high) + "/" + std::to_string(h.n) + "), error among those " + Fixed(h.error_rate) + "\n";
  }
  WriteFileAtomic(dir / "matched_summary.json", stats.dump(2) + "\n");
  WriteFileAtomic(dir / "confidence_cdf.svg",
                  plot::CdfComparison({{na, conf_a}, {nb, conf_b}}, o.tau, "Confidence CDF on matched pairs"));
  WriteFileAtomic(dir / "summary.txt", summary);
  std::cout << "matched " << name << ": " << pairs.size() << " pairs -> " << (dir / "matched_pairs.jsonl").string() << "\n";
}

void Transfer(const TransferOptions& o) {
  if (o.source.empty() || o.target.empty()) ThrowUsage("transfer needs --source and --target");
  shift::Criterion criterion;
  if (o.criterion == "risk") criterion = shift::Criterion::kFixedRisk;
  else if (o.criterion == "coverage") criterion = shift::Criterion::kFixedCoverage;
  else ThrowUsage("criterion must be risk or coverage");
  const auto src = LoadCurve(o.source, o.items, o.grid);
  const auto tgt = LoadCurve(o.target, o.items, o.grid);
  CheckSameGrid(src, tgt);
  const std::string ns = Stem(o.source), nt = Stem(o.target);
  const std::string name = o.name.empty() ? ns + "_to_" + nt : o.name;
  const auto dir = ReportDir(o.out_dir, name);
  const auto r = shift::ThresholdTransfer(src, tgt, criterion, o.value, ns + "->" + nt);

  const auto cv = [](const shift::CurveValue& v) {
    return ordered_json{{"risk", Num(v.risk)}, {"coverage", Num(v.coverage)}, {"n", Num(v.n)}};
  };
  ordered_json j;
  j["direction"] = r.direction;
  j["criterion"] = {{std::string(shift::CriterionName(r.criterion)), r.value}};
  j["epsilon_star"] = r.epsilon_star;
  j["source"] = cv(r.source);
  j["target"] = cv(r.target);
  WriteFileAtomic(dir / "transfer.jsonl", j.dump() + "\n");

  std::string summary = "transfer " + r.direction + ", " + std::string(shift::CriterionName(r.criterion)) + " " +
                        Fixed(r.value) + "\n";
  summary += "  epsilon*: " + Fixed(r.epsilon_star, 6) + "\n";
  summary += "  source: risk " + Fixed(r.source.risk) + ", coverage " + Fixed(r.source.coverage) + ", n " + Fixed(r.source.n, 1) + "\n";
  summary += "  target: risk " + Fixed(r.target.risk) + ", coverage " + Fixed(r.target.coverage) + ", n " + Fixed(r.target.n, 1) + "\n";
  WriteFileAtomic(dir / "summary.txt", summary);
  std::cout << summary;
}

void Report(const ReportOptions& o) {
  CheckEpsilon(o.epsilon);
  if (o.logs.empty()) ThrowUsage("report needs at least one --log");
  const auto key = LoadKey(o.items);
  const auto dir = ReportDir(o.out_dir, o.name);
  std::string summary;
  std::vector<plot::NamedCurve> curves;
  std::set<std::string> names;
  for (const auto& log : o.logs) {
    const std::string stem = Stem(log);
    if (!names.insert(stem).second) ThrowUsage("two logs share the name '" + stem + "'");
    CheckName(stem, "log name");
    curves.emplace_back(stem, WriteSweepBundle(dir / stem, log, key, o.grid, o.epsilon, stem, &summary));
    summary += "\n";
  }
  if (curves.size() > 1) {
    for (std::size_t i = 1; i < curves.size(); ++i) CheckSameGrid(curves[0].second, curves[i].second);
    WriteFileAtomic(dir / "risk_coverage_overlay.svg", plot::RiskCoverage(curves, "Risk-coverage"));
    WriteFileAtomic(dir / "ece_threshold_overlay.svg", plot::EceVsThreshold(curves, "ECE vs threshold"));
  }
  WriteFileAtomic(dir / "summary.txt", summary);
  std::cout << "report " << o.name << ": " << o.logs.size() << " log(s) -> " << (dir / "summary.txt").string() << "\n";
}

}  // namespace selgate::commands
