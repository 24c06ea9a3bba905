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

#ifndef SELGATE_COMMON_HPP_
#define SELGATE_COMMON_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace selgate {

// Error categories double as process exit codes for the CLI.
enum class ErrorKind : int {
  kUsage = 1,
  kData = 2,
  kAdapter = 3,
  kIo = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void ThrowUsage(const std::string& message);
[[noreturn]] void ThrowData(const std::string& message);
[[noreturn]] void ThrowIo(const std::string& message);

// Multiple-choice option label.
enum class Label : std::uint8_t { kA = 0, kB, kC, kD, kE };

inline constexpr std::size_t kNumLabels = 5;
inline constexpr std::array<Label, kNumLabels> kAllLabels = {
    Label::kA, Label::kB, Label::kC, Label::kD, Label::kE};

inline constexpr std::size_t LabelIndex(Label label) {
  return static_cast<std::size_t>(label);
}
char LabelChar(Label label);
std::string LabelString(Label label);
// Exact match on "A".."E" (uppercase only).
std::optional<Label> ParseLabel(std::string_view text);

// Shortest decimal text that round-trips to the same double.
std::string FormatDouble(double value);
std::optional<double> ParseDouble(std::string_view text);

std::string Trim(std::string_view text);

std::string ReadFile(const std::filesystem::path& path);
// Writes to a sibling temp file then renames over `path`.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view data);

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view data);
std::string Sha256File(const std::filesystem::path& path);

// UTC wall clock, e.g. 2026-10-15T21:26:03.120Z.
std::string UtcTimestamp();

}  // namespace selgate

#endif  // SELGATE_COMMON_HPP_
