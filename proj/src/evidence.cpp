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

#include "evidence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "common.hpp"
#include "json.hpp"
#include "subprocess.hpp"

namespace selgate::evidence {

using nlohmann::ordered_json;

const std::vector<Condition>& KnownConditions() {
  static const std::vector<Condition> kConditions = {
      {"baseline18", 12, 6, 0.0, 1.0, 85},
      {"sparse6", 6, 0, 0.0, 1.0, 85},
      {"earlyhalf6", 6, 0, 0.0, 0.5, 85},
      {"latehalf6", 6, 0, 0.5, 1.0, 85},
      {"compressed30", 12, 6, 0.0, 1.0, 30},
  };
  return kConditions;
}

const Condition& ConditionByName(std::string_view name) {
  for (const auto& c : KnownConditions()) {
    if (c.name == name) return c;
  }
  ThrowUsage("unknown evidence condition '" + std::string(name) + "'");
}

std::vector<double> UniformTimestamps(double duration, int n, double window_lo,
                                      double window_hi) {
  if (!(duration > 0.0)) ThrowData("video duration must be positive");
  if (n < 0) ThrowUsage("frame count must be nonnegative");
  if (!(window_lo >= 0.0 && window_lo < window_hi && window_hi <= 1.0)) {
    ThrowUsage("window must satisfy 0 <= a < b <= 1");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  const double span = window_hi - window_lo;
  for (int i = 0; i < n; ++i) {
    out.push_back((window_lo + (i + 0.5) / n * span) * duration);
  }
  return out;
}

std::vector<double> ZoomTimestamps(double duration, int n) {
  if (!(duration > 0.0)) ThrowData("video duration must be positive");
  if (n < 0) ThrowUsage("frame count must be nonnegative");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    out.push_back((kZoomStart + (j + 0.5) / n * kZoomWidth) * duration);
  }
  return out;
}

std::vector<double> DedupMerge(const std::vector<double>& a, const std::vector<double>& b,
                               double min_gap) {
  std::vector<double> merged;
  merged.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(merged));
  std::vector<double> out;
  for (double t : merged) {
    if (out.empty() || t - out.back() > min_gap) out.push_back(t);
  }
  return out;
}

Plan BuildPlan(const std::string& video_id, double duration, const Condition& condition) {
  Plan plan;
  plan.video_id = video_id;
  plan.condition = condition.name;
  plan.duration = duration;
  plan.timestamps = DedupMerge(
      UniformTimestamps(duration, condition.uniform_count, condition.window_lo,
                        condition.window_hi),
      ZoomTimestamps(duration, condition.zoom_count));
  return plan;
}

std::string DecoderIdentity(const DecoderSpec& decoder) {
  if (decoder.version_command.empty()) return decoder.frame_command;
  const auto result = RunCommand(SplitCommandLine(decoder.version_command));
  if (result.exit_code != 0) {
    ThrowIo("decoder version command failed: " + Trim(result.stderr_text));
  }
  return Trim(result.stdout_text);
}

double ProbeDuration(const DecoderSpec& decoder, const std::filesystem::path& video) {
  if (decoder.probe_command.empty()) ThrowUsage("no decoder probe command configured");
  const auto argv =
      SubstituteArgs(SplitCommandLine(decoder.probe_command), {{"input", video.string()}});
  const auto result = RunCommand(argv);
  if (result.exit_code != 0) {
    ThrowData("probe failed for " + video.string() + ": " + Trim(result.stderr_text));
  }
  auto value = ParseDouble(Trim(result.stdout_text));
  if (!value || !(*value > 0.0) || !std::isfinite(*value)) {
    ThrowData("probe returned no usable duration for " + video.string());
  }
  return *value;
}

std::string FrameFileName(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%03d.jpg", index);
  return buf;
}

namespace {

std::string FormatTimestamp(double t) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", t);
  return buf;
}

class FrameCleanup {
 public:
  explicit FrameCleanup(std::filesystem::path dir) : dir_(std::move(dir)) {}
  ~FrameCleanup() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& f : written_) std::filesystem::remove(dir_ / f, ec);
    std::filesystem::remove(dir_ / kManifestFileName, ec);
  }
  void Track(const std::string& file) { written_.push_back(file); }
  void Commit() { committed_ = true; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> written_;
  bool committed_ = false;
};

}  // namespace

Manifest ExtractFrames(const Plan& plan, int jpeg_quality,
                       const std::filesystem::path& video,
                       const DecoderSpec& decoder,
                       const std::filesystem::path& out_dir) {
  if (decoder.frame_command.empty()) ThrowUsage("no decoder frame command configured");
  if (!plan.timestamps.empty() && plan.timestamps.back() > plan.duration) {
    ThrowData("plan timestamp beyond video duration for " + plan.video_id);
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) ThrowIo("cannot create " + out_dir.string());

  Manifest manifest;
  manifest.plan = plan;
  manifest.jpeg_quality = jpeg_quality;
  manifest.decoder = DecoderIdentity(decoder);

  const auto argv_template = SplitCommandLine(decoder.frame_command);
  FrameCleanup cleanup(out_dir);
  for (std::size_t i = 0; i < plan.timestamps.size(); ++i) {
    const int index = static_cast<int>(i);
    const std::string file = FrameFileName(index);
    const auto out_path = out_dir / file;
    const std::string ts = FormatTimestamp(plan.timestamps[i]);
    cleanup.Track(file);
    const auto argv = SubstituteArgs(argv_template, {
                                                        {"input", video.string()},
                                                        {"timestamp", ts},
                                                        {"quality", std::to_string(jpeg_quality)},
                                                        {"short_side", std::to_string(kShortSide)},
                                                        {"output", out_path.string()},
                                                    });
    const auto result = RunCommand(argv);
    if (result.exit_code != 0) {
      ThrowData("decoder failed at t=" + ts + " for " + plan.video_id + " (exit " +
                std::to_string(result.exit_code) + "): " + Trim(result.stderr_text));
    }
    if (!std::filesystem::exists(out_path) || std::filesystem::file_size(out_path) == 0) {
      ThrowData("decoder produced no frame at t=" + ts + " for " + plan.video_id);
    }
    const std::string bytes = ReadFile(out_path);
    auto dims = JpegDimensions(bytes);
    if (!dims) ThrowData("decoder output is not a JPEG at t=" + ts + " for " + plan.video_id);
    if (std::min(dims->first, dims->second) != kShortSide) {
      ThrowData("frame at t=" + ts + " for " + plan.video_id + " has short side " +
                std::to_string(std::min(dims->first, dims->second)) + ", expected " +
                std::to_string(kShortSide));
    }
    manifest.frames.push_back(FrameEntry{index, plan.timestamps[i], file, Sha256Hex(bytes),
                                         dims->first, dims->second});
  }
  WriteFileAtomic(out_dir / kManifestFileName, SerializeManifest(manifest));
  cleanup.Commit();
  return manifest;
}

std::string SerializeManifest(const Manifest& m) {
  ordered_json frames = ordered_json::array();
  for (const auto& f : m.frames) {
    frames.push_back({{"index", f.index},
                      {"timestamp", f.timestamp},
                      {"file", f.file},
                      {"sha256", f.sha256},
                      {"width", f.width},
                      {"height", f.height}});
  }
  ordered_json doc = {
      {"plan",
       {{"video_id", m.plan.video_id},
        {"condition", m.plan.condition},
        {"duration", m.plan.duration},
        {"timestamps", m.plan.timestamps}}},
      {"extraction", {{"short_side", m.short_side}, {"jpeg_quality", m.jpeg_quality}}},
      {"decoder", m.decoder},
      {"frames", frames},
  };
  return doc.dump(2) + "\n";
}

Manifest ParseManifest(std::string_view text) {
  Manifest m;
  try {
    const auto doc = ordered_json::parse(text);
    const auto& plan = doc.at("plan");
    m.plan.video_id = plan.at("video_id").get<std::string>();
    m.plan.condition = plan.at("condition").get<std::string>();
    m.plan.duration = plan.at("duration").get<double>();
    m.plan.timestamps = plan.at("timestamps").get<std::vector<double>>();
    m.short_side = doc.at("extraction").at("short_side").get<int>();
    m.jpeg_quality = doc.at("extraction").at("jpeg_quality").get<int>();
    m.decoder = doc.at("decoder").get<std::string>();
    for (const auto& f : doc.at("frames")) {
      FrameEntry e;
      e.index = f.at("index").get<int>();
      e.timestamp = f.at("timestamp").get<double>();
      e.file = f.at("file").get<std::string>();
      e.sha256 = f.at("sha256").get<std::string>();
      e.width = f.at("width").get<int>();
      e.height = f.at("height").get<int>();
      m.frames.push_back(std::move(e));
    }
  } catch (const ordered_json::exception& e) {
    ThrowData(std::string("malformed manifest: ") + e.what());
  }
  for (const auto& f : m.frames) {
    if (f.sha256.size() != 64) ThrowData("manifest digest is not 64 hex chars: " + f.file);
    if (f.file.find('/') != std::string::npos || f.file == "..") {
      ThrowData("manifest frame file must be a plain name: " + f.file);
    }
  }
  return m;
}

Manifest LoadManifest(const std::filesystem::path& path) {
  return ParseManifest(ReadFile(path));
}

std::size_t VerifyReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const VerifyEntry& e) { return !e.ok; }));
}

VerifyReport VerifyManifest(const Manifest& manifest, const std::filesystem::path& frames_dir) {
  VerifyReport report;
  for (const auto& f : manifest.frames) {
    VerifyEntry e{f.index, f.file, false, ""};
    const auto path = frames_dir / f.file;
    if (!std::filesystem::is_regular_file(path)) {
      e.reason = "missing";
    } else if (Sha256File(path) != f.sha256) {
      e.reason = "digest_mismatch";
    } else {
      e.ok = true;
    }
    report.ok = report.ok && e.ok;
    report.entries.push_back(std::move(e));
  }
  return report;
}

std::optional<std::pair<int, int>> JpegDimensions(std::string_view bytes) {
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(bytes[i]); };
  if (bytes.size() < 4 || byte(0) != 0xFF || byte(1) != 0xD8) return std::nullopt;
  std::size_t pos = 2;
  while (pos + 4 <= bytes.size()) {
    if (byte(pos) != 0xFF) return std::nullopt;
    const unsigned char marker = byte(pos + 1);
    if (marker == 0xFF) {  // fill byte
      ++pos;
      continue;
    }
    if (marker == 0xD9 || marker == 0xDA) return std::nullopt;  // EOI / SOS before SOF
    const std::size_t len = (static_cast<std::size_t>(byte(pos + 2)) << 8) | byte(pos + 3);
    const bool is_sof = marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 &&
                        marker != 0xC8 && marker != 0xCC;
    if (is_sof) {
      if (pos + 9 > bytes.size()) return std::nullopt;
      const int height = (byte(pos + 5) << 8) | byte(pos + 6);
      const int width = (byte(pos + 7) << 8) | byte(pos + 8);
      return std::make_pair(width, height);
    }
    pos += 2 + len;
  }
  return std::nullopt;
}

}  // namespace selgate::evidence
