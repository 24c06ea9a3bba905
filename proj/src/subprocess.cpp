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

#include "subprocess.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <mutex>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "common.hpp"

extern char** environ;

namespace selgate {

namespace {

void IgnoreSigpipeOnce() {
  static std::once_flag flag;
  std::call_once(flag, [] { std::signal(SIGPIPE, SIG_IGN); });
}

int WaitExit(pid_t pid) {
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) return -1;
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -1;
}

struct Pipe {
  int fd[2] = {-1, -1};
  Pipe() {
    if (::pipe2(fd, O_CLOEXEC) != 0) ThrowIo(std::string("pipe: ") + std::strerror(errno));
  }
  ~Pipe() {
    for (int f : fd) {
      if (f >= 0) ::close(f);
    }
  }
  int Release(int end) {
    int f = fd[end];
    fd[end] = -1;
    return f;
  }
};

class SpawnActions {
 public:
  SpawnActions() { posix_spawn_file_actions_init(&actions_); }
  ~SpawnActions() { posix_spawn_file_actions_destroy(&actions_); }
  void Dup(int from, int to) { posix_spawn_file_actions_adddup2(&actions_, from, to); }
  posix_spawn_file_actions_t* get() { return &actions_; }

 private:
  posix_spawn_file_actions_t actions_;
};

pid_t Spawn(const std::vector<std::string>& argv, SpawnActions& actions) {
  if (argv.empty()) ThrowUsage("empty command");
  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);
  pid_t pid = -1;
  const int rc = ::posix_spawnp(&pid, cargv[0], actions.get(), nullptr, cargv.data(), environ);
  if (rc != 0) {
    ThrowIo("cannot spawn '" + argv[0] + "': " + std::strerror(rc));
  }
  return pid;
}

}  // namespace

std::vector<std::string> SplitCommandLine(std::string_view command) {
  std::vector<std::string> out;
  std::string current;
  bool in_token = false;
  char quote = 0;
  for (std::size_t i = 0; i < command.size(); ++i) {
    const char c = command[i];
    if (quote) {
      if (c == quote) {
        quote = 0;
      } else if (c == '\\' && quote == '"' && i + 1 < command.size()) {
        current.push_back(command[++i]);
      } else {
        current.push_back(c);
      }
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      in_token = true;
    } else if (c == '\\' && i + 1 < command.size()) {
      current.push_back(command[++i]);
      in_token = true;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (in_token) {
        out.push_back(std::move(current));
        current.clear();
        in_token = false;
      }
    } else {
      current.push_back(c);
      in_token = true;
    }
  }
  if (quote) ThrowUsage("unterminated quote in command: " + std::string(command));
  if (in_token) out.push_back(std::move(current));
  return out;
}

std::vector<std::string> SubstituteArgs(
    const std::vector<std::string>& argv,
    const std::map<std::string, std::string>& values) {
  std::vector<std::string> out;
  out.reserve(argv.size());
  for (const auto& token : argv) {
    std::string result;
    std::size_t pos = 0;
    while (pos < token.size()) {
      const std::size_t open = token.find('{', pos);
      if (open == std::string::npos) {
        result.append(token, pos, std::string::npos);
        break;
      }
      const std::size_t close = token.find('}', open);
      if (close == std::string::npos) {
        result.append(token, pos, std::string::npos);
        break;
      }
      result.append(token, pos, open - pos);
      auto it = values.find(token.substr(open + 1, close - open - 1));
      if (it != values.end()) {
        result += it->second;
      } else {
        result.append(token, open, close - open + 1);
      }
      pos = close + 1;
    }
    out.push_back(std::move(result));
  }
  return out;
}

CommandResult RunCommand(const std::vector<std::string>& argv) {
  IgnoreSigpipeOnce();
  Pipe out_pipe;
  Pipe err_pipe;
  SpawnActions actions;
  actions.Dup(out_pipe.fd[1], STDOUT_FILENO);
  actions.Dup(err_pipe.fd[1], STDERR_FILENO);
  const pid_t pid = Spawn(argv, actions);
  ::close(out_pipe.Release(1));
  ::close(err_pipe.Release(1));

  CommandResult result;
  pollfd fds[2] = {{out_pipe.fd[0], POLLIN, 0}, {err_pipe.fd[0], POLLIN, 0}};
  std::string* sinks[2] = {&result.stdout_text, &result.stderr_text};
  int open_count = 2;
  char buf[4096];
  while (open_count > 0) {
    if (::poll(fds, 2, -1) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (int i = 0; i < 2; ++i) {
      if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      const ssize_t n = ::read(fds[i].fd, buf, sizeof(buf));
      if (n > 0) {
        sinks[i]->append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || errno != EINTR) {
        fds[i].fd = -1;
        --open_count;
      }
    }
  }
  result.exit_code = WaitExit(pid);
  return result;
}

LineProcess::LineProcess(const std::string& command_line) {
  IgnoreSigpipeOnce();
  Pipe in_pipe;
  Pipe out_pipe;
  SpawnActions actions;
  actions.Dup(in_pipe.fd[0], STDIN_FILENO);
  actions.Dup(out_pipe.fd[1], STDOUT_FILENO);
  pid_ = Spawn({"/bin/sh", "-c", command_line}, actions);
  to_child_ = in_pipe.Release(1);
  from_child_ = out_pipe.Release(0);
  alive_ = true;
}

LineProcess::~LineProcess() { Close(); }

bool LineProcess::WriteLine(std::string_view line) {
  if (!alive_) return false;
  std::string data(line);
  data.push_back('\n');
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      alive_ = false;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

std::optional<std::string> LineProcess::ReadLine(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    if (!alive_) return std::nullopt;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd pfd{from_child_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      alive_ = false;
      return std::nullopt;
    }
    if (rc == 0) return std::nullopt;
    char buf[8192];
    const ssize_t n = ::read(from_child_, buf, sizeof(buf));
    if (n > 0) {
      buffer_.append(buf, static_cast<std::size_t>(n));
    } else if (n == 0 || errno != EINTR) {
      alive_ = false;
    }
  }
}

int LineProcess::Close() {
  if (pid_ < 0) return -1;
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  alive_ = false;
  // Give the child a grace period after EOF on stdin, then kill it.
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(2);
  int status = 0;
  pid_t rc = 0;
  while ((rc = ::waitpid(pid_, &status, WNOHANG)) == 0 &&
         std::chrono::steady_clock::now() < deadline) {
    ::usleep(2000);
  }
  if (rc == 0) {
    ::kill(pid_, SIGKILL);
    rc = ::waitpid(pid_, &status, 0);
  }
  pid_ = -1;
  if (rc > 0 && WIFEXITED(status)) return WEXITSTATUS(status);
  return -1;
}

}  // namespace selgate
