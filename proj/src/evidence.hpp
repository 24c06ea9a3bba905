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

// Evidence packets: deterministic frame timestamp plans per condition, frame
// extraction through an external decoder, and SHA-256 manifests.

#ifndef SELGATE_EVIDENCE_HPP_
#define SELGATE_EVIDENCE_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace selgate::evidence {

inline constexpr double kMinGapSeconds = 0.150;
inline constexpr int kShortSide = 512;
// Zoom window is [0.33, 0.66] of the duration, taken literally.
inline constexpr double kZoomStart = 0.33;
inline constexpr double kZoomWidth = 0.33;

struct Condition {
  std::string name;
  int uniform_count = 0;
  int zoom_count = 0;
  double window_lo = 0.0;
  double window_hi = 1.0;
  int jpeg_quality = 85;
};

// baseline18, sparse6, earlyhalf6, latehalf6, compressed30.
const std::vector<Condition>& KnownConditions();
// Usage error for unknown names.
const Condition& ConditionByName(std::string_view name);

// t_i = (a + (i + 0.5) / n * (b - a)) * T for i in [0, n).
std::vector<double> UniformTimestamps(double duration, int n, double window_lo = 0.0,
                                      double window_hi = 1.0);
// t_j = (0.33 + (j + 0.5) / n * 0.33) * T for j in [0, n).
std::vector<double> ZoomTimestamps(double duration, int n);
// Merges two sorted lists, then keeps a timestamp only if it is more than
// `min_gap` after the last kept one.
std::vector<double> DedupMerge(const std::vector<double>& a, const std::vector<double>& b,
                               double min_gap = kMinGapSeconds);

struct Plan {
  std::string video_id;
  std::string condition;
  double duration = 0.0;
  std::vector<double> timestamps;

  bool operator==(const Plan&) const = default;
};

Plan BuildPlan(const std::string& video_id, double duration, const Condition& condition);

// Command templates for the external decoder. Placeholders:
//   frame:   {input} {timestamp} {quality} {short_side} {output}
//   probe:   {input}   (prints the duration in seconds on stdout)
//   version: no placeholders (prints an identification string)
struct DecoderSpec {
  std::string frame_command;
  std::string probe_command;
  std::string version_command;
};

// Identification string recorded in manifests. Falls back to the frame
// command template when no version command is configured.
std::string DecoderIdentity(const DecoderSpec& decoder);
double ProbeDuration(const DecoderSpec& decoder, const std::filesystem::path& video);

struct FrameEntry {
  int index = 0;
  double timestamp = 0.0;
  std::string file;
  std::string sha256;
  int width = 0;
  int height = 0;

  bool operator==(const FrameEntry&) const = default;
};

struct Manifest {
  Plan plan;
  int short_side = kShortSide;
  int jpeg_quality = 85;
  std::string decoder;
  std::vector<FrameEntry> frames;

  bool operator==(const Manifest&) const = default;
};

inline constexpr const char* kManifestFileName = "manifest.json";

std::string FrameFileName(int index);

// Runs the decoder once per timestamp, writing frames and manifest.json into
// `out_dir`. On any failure the frames written by this call are removed and no
// manifest is left behind.
Manifest ExtractFrames(const Plan& plan, int jpeg_quality,
                       const std::filesystem::path& video,
                       const DecoderSpec& decoder,
                       const std::filesystem::path& out_dir);

std::string SerializeManifest(const Manifest& manifest);
Manifest ParseManifest(std::string_view text);
Manifest LoadManifest(const std::filesystem::path& path);

struct VerifyEntry {
  int index = 0;
  std::string file;
  bool ok = false;
  std::string reason;  // empty, "missing", or "digest_mismatch"
};

struct VerifyReport {
  std::vector<VerifyEntry> entries;
  bool ok = true;
  std::size_t failures() const;
};

VerifyReport VerifyManifest(const Manifest& manifest, const std::filesystem::path& frames_dir);

// Reads the frame size from a baseline/progressive JPEG SOF segment.
std::optional<std::pair<int, int>> JpegDimensions(std::string_view bytes);

}  // namespace selgate::evidence

#endif  // SELGATE_EVIDENCE_HPP_
