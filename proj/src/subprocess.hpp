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

#ifndef SELGATE_SUBPROCESS_HPP_
#define SELGATE_SUBPROCESS_HPP_

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <sys/types.h>

namespace selgate {

// Splits a command template into argv. Supports single and double quotes and
// backslash escapes; no variable expansion, no globbing.
std::vector<std::string> SplitCommandLine(std::string_view command);

// Replaces {name} placeholders inside each argv token. Unknown placeholders
// are left verbatim.
std::vector<std::string> SubstituteArgs(
    const std::vector<std::string>& argv,
    const std::map<std::string, std::string>& values);

struct CommandResult {
  int exit_code = -1;  // -1 when terminated by a signal
  std::string stdout_text;
  std::string stderr_text;
};

// Runs argv to completion, capturing both streams. Throws an io error when the
// program cannot be spawned.
CommandResult RunCommand(const std::vector<std::string>& argv);

// A child process speaking a line protocol over its stdin/stdout. stderr is
// inherited. The command line is run through /bin/sh -c.
class LineProcess {
 public:
  explicit LineProcess(const std::string& command_line);
  ~LineProcess();

  LineProcess(const LineProcess&) = delete;
  LineProcess& operator=(const LineProcess&) = delete;

  // Returns false once the pipe is broken.
  bool WriteLine(std::string_view line);
  // nullopt on EOF, error, or timeout.
  std::optional<std::string> ReadLine(std::chrono::milliseconds timeout);

  bool alive() const { return alive_; }
  // Closes stdin and reaps the child. Returns its exit status.
  int Close();

 private:
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  bool alive_ = false;
  std::string buffer_;
};

}  // namespace selgate

#endif  // SELGATE_SUBPROCESS_HPP_
