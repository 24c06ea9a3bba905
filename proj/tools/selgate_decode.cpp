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

// selgate-decode: frame decoder used by `selgate plan`.
//
//   selgate-decode frame INPUT SECONDS QUALITY SHORT_SIDE OUTPUT
//   selgate-decode probe INPUT
//   selgate-decode version
//   selgate-decode synth OUTPUT SECONDS FPS WIDTH HEIGHT SEED
//
// Frames are read sequentially up to the target index instead of seeking, so
// the chosen frame never depends on container index quality.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/core/utils/logger.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>

namespace {

int Usage() {
  std::fprintf(stderr,
               "usage: selgate-decode frame INPUT SECONDS QUALITY SHORT_SIDE OUTPUT\n"
               "       selgate-decode probe INPUT\n"
               "       selgate-decode version\n"
               "       selgate-decode synth OUTPUT SECONDS FPS WIDTH HEIGHT SEED\n");
  return 1;
}

bool ParseNum(const char* s, double* out) {
  char* end = nullptr;
  *out = std::strtod(s, &end);
  return end && *end == '\0' && std::isfinite(*out);
}

struct VideoInfo {
  double fps = 0.0;
  long frames = 0;
};

bool Open(cv::VideoCapture& cap, const std::string& path, VideoInfo* info) {
  if (!cap.open(path, cv::CAP_ANY)) return false;
  info->fps = cap.get(cv::CAP_PROP_FPS);
  info->frames = static_cast<long>(cap.get(cv::CAP_PROP_FRAME_COUNT));
  return info->fps > 0.0 && info->frames > 0;
}

int Probe(const std::string& input) {
  cv::VideoCapture cap;
  VideoInfo info;
  if (!Open(cap, input, &info)) {
    std::fprintf(stderr, "cannot read video %s\n", input.c_str());
    return 2;
  }
  std::printf("%.6f\n", static_cast<double>(info.frames) / info.fps);
  return 0;
}

int Frame(const std::string& input, double seconds, int quality, int short_side,
          const std::string& output) {
  if (quality < 1 || quality > 100 || short_side < 1 || seconds < 0.0) return Usage();
  cv::VideoCapture cap;
  VideoInfo info;
  if (!Open(cap, input, &info)) {
    std::fprintf(stderr, "cannot read video %s\n", input.c_str());
    return 2;
  }
  // Frame i covers [i/fps, (i+1)/fps).
  long index = static_cast<long>(std::floor(seconds * info.fps + 1e-9));
  if (index >= info.frames) index = info.frames - 1;
  cv::Mat frame;
  for (long i = 0; i <= index; ++i) {
    if (!cap.read(frame)) {
      std::fprintf(stderr, "video ended before frame %ld\n", index);
      return 2;
    }
  }
  const int w = frame.cols, h = frame.rows;
  cv::Size size;
  if (w <= h) {
    size = {short_side, static_cast<int>(std::lround(static_cast<double>(h) * short_side / w))};
  } else {
    size = {static_cast<int>(std::lround(static_cast<double>(w) * short_side / h)), short_side};
  }
  cv::Mat resized;
  cv::resize(frame, resized, size, 0, 0, size.width > w ? cv::INTER_CUBIC : cv::INTER_AREA);
  std::vector<unsigned char> jpeg;
  if (!cv::imencode(".jpg", resized, jpeg, {cv::IMWRITE_JPEG_QUALITY, quality})) {
    std::fprintf(stderr, "jpeg encode failed\n");
    return 2;
  }
  std::ofstream out(output, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(jpeg.data()), static_cast<std::streamsize>(jpeg.size()));
  if (!out) {
    std::fprintf(stderr, "cannot write %s\n", output.c_str());
    return 2;
  }
  return 0;
}

// Deterministic test clip: drifting rectangles, a moving disc and a frame
// counter on a seed-dependent background.
int Synth(const std::string& output, double seconds, double fps, int width, int height,
          std::uint64_t seed) {
  if (!(seconds > 0.0) || !(fps > 0.0) || width < 16 || height < 16) return Usage();
  cv::VideoWriter writer(output, cv::VideoWriter::fourcc('M', 'J', 'P', 'G'), fps, {width, height});
  if (!writer.isOpened()) {
    std::fprintf(stderr, "cannot open writer for %s\n", output.c_str());
    return 2;
  }
  std::uint64_t s = seed * 0x9E3779B97F4A7C15ULL + 1;
  const auto next = [&s] {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
  };
  const cv::Scalar bg(static_cast<double>(next() % 128), static_cast<double>(next() % 128),
                      static_cast<double>(next() % 128));
  const double vx = 20.0 + static_cast<double>(next() % 60), vy = 10.0 + static_cast<double>(next() % 40);
  const long n = std::lround(seconds * fps);
  cv::Mat img(height, width, CV_8UC3);
  for (long i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fps;
    img.setTo(bg);
    for (int k = 0; k < 4; ++k) {
      const int x = static_cast<int>(std::fmod(vx * t * (k + 1) + 37.0 * k, width));
      const int y = static_cast<int>(std::fmod(vy * t + 53.0 * k, height));
      cv::rectangle(img, {x, y, width / 8, height / 8}, cv::Scalar(60 * k, 255 - 50 * k, 128), cv::FILLED);
    }
    cv::circle(img, {static_cast<int>(width / 2 + width / 3 * std::cos(t)), height / 2}, height / 10,
               cv::Scalar(255, 255, 255), cv::FILLED);
    cv::putText(img, std::to_string(i), {10, height - 12}, cv::FONT_HERSHEY_SIMPLEX, 1.0,
                cv::Scalar(255, 255, 255), 2);
    writer.write(img);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  cv::utils::logging::setLogLevel(cv::utils::logging::LOG_LEVEL_ERROR);
  if (argc < 2) return Usage();
  const std::string cmd = argv[1];
  if (cmd == "version" && argc == 2) {
    std::printf("selgate-decode 1 (opencv %s)\n", CV_VERSION);
    return 0;
  }
  if (cmd == "probe" && argc == 3) return Probe(argv[2]);
  if (cmd == "frame" && argc == 7) {
    double t, q, ss;
    if (!ParseNum(argv[3], &t) || !ParseNum(argv[4], &q) || !ParseNum(argv[5], &ss)) return Usage();
    return Frame(argv[2], t, static_cast<int>(q), static_cast<int>(ss), argv[6]);
  }
  if (cmd == "synth" && argc == 8) {
    double secs, fps, w, h, seed;
    if (!ParseNum(argv[3], &secs) || !ParseNum(argv[4], &fps) || !ParseNum(argv[5], &w) ||
        !ParseNum(argv[6], &h) || !ParseNum(argv[7], &seed)) {
      return Usage();
    }
    return Synth(argv[2], secs, fps, static_cast<int>(w), static_cast<int>(h),
                 static_cast<std::uint64_t>(seed));
  }
  return Usage();
}
