/*
 * Copyright 2026 The Forge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <mutex>

#include "forge/error.hpp"

extern char** environ;

namespace forge::detail {

namespace {

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

struct Pipe {
  int rd = -1;
  int wr = -1;
  Pipe() {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) throw RunnerError(std::string("pipe: ") + std::strerror(errno));
    rd = fds[0];
    wr = fds[1];
  }
  ~Pipe() {
    close_fd(rd);
    close_fd(wr);
  }
};

void append_capped(std::string& sink, const char* data, std::size_t n, std::size_t cap) {
  if (sink.size() < cap) sink.append(data, std::min(n, cap - sink.size()));
}

}  // namespace

ProcessResult run_shell(const std::string& command, const std::string& input, const ProcessOptions& options) {
  static std::once_flag sigpipe_once;
  std::call_once(sigpipe_once, [] { ::signal(SIGPIPE, SIG_IGN); });

  // Everything the child needs is built before fork.
  std::vector<std::string> env_store;
  for (char** e = environ; e && *e; ++e) {
    std::string entry(*e);
    bool overridden = false;
    for (const auto& [k, v] : options.extra_env) overridden |= entry.rfind(k + "=", 0) == 0;
    if (!overridden) env_store.push_back(std::move(entry));
  }
  for (const auto& [k, v] : options.extra_env) env_store.push_back(k + "=" + v);
  std::vector<char*> envp;
  for (auto& s : env_store) envp.push_back(s.data());
  envp.push_back(nullptr);
  std::string cmd = command;
  char sh[] = "/bin/sh";
  char dash_c[] = "-c";
  char* argv[] = {sh, dash_c, cmd.data(), nullptr};

  Pipe in, out, err;
  pid_t pid = ::fork();
  if (pid < 0) throw RunnerError(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    if (options.memory_cap_bytes > 0) {
      rlimit lim{options.memory_cap_bytes, options.memory_cap_bytes};
      ::setrlimit(RLIMIT_DATA, &lim);
    }
    ::dup2(in.rd, STDIN_FILENO);
    ::dup2(out.wr, STDOUT_FILENO);
    ::dup2(err.wr, STDERR_FILENO);
    ::execve(sh, argv, envp.data());
    _exit(127);
  }
  ::setpgid(pid, pid);
  close_fd(in.rd);
  close_fd(out.wr);
  close_fd(err.wr);
  ::fcntl(in.wr, F_SETFL, O_NONBLOCK);

  ProcessResult result;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(options.timeout_seconds);
  std::size_t written = 0;
  if (input.empty()) close_fd(in.wr);
  char buf[65536];
  while (out.rd >= 0 || err.rd >= 0) {
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      result.timed_out = true;
      break;
    }
    pollfd fds[3];
    int n = 0;
    int idx_out = -1, idx_err = -1, idx_in = -1;
    if (out.rd >= 0) fds[idx_out = n++] = {out.rd, POLLIN, 0};
    if (err.rd >= 0) fds[idx_err = n++] = {err.rd, POLLIN, 0};
    if (in.wr >= 0) fds[idx_in = n++] = {in.wr, POLLOUT, 0};
    int rc = ::poll(fds, static_cast<nfds_t>(n), static_cast<int>(std::min<long long>(remaining.count(), 1000)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (idx_in >= 0 && (fds[idx_in].revents & (POLLOUT | POLLERR | POLLHUP))) {
      ssize_t w = ::write(in.wr, input.data() + written, input.size() - written);
      if (w > 0) written += static_cast<std::size_t>(w);
      if (w < 0 && errno != EAGAIN && errno != EINTR) written = input.size();
      if (written >= input.size()) close_fd(in.wr);
    }
    auto drain = [&](int idx, int& fd, std::string& sink, std::size_t cap) {
      if (idx < 0 || !(fds[idx].revents & (POLLIN | POLLHUP | POLLERR))) return;
      ssize_t r = ::read(fd, buf, sizeof buf);
      if (r > 0) {
        append_capped(sink, buf, static_cast<std::size_t>(r), cap);
      } else if (r == 0 || (errno != EAGAIN && errno != EINTR)) {
        close_fd(fd);
      }
    };
    drain(idx_out, out.rd, result.out, options.max_stdout);
    drain(idx_err, err.rd, result.err, options.max_stderr);
  }

  int status = 0;
  if (result.timed_out) {
    ::kill(-pid, SIGKILL);
    ::waitpid(pid, &status, 0);
    return result;
  }
  // Pipes closed; the child may still be running with them detached.
  for (;;) {
    pid_t w = ::waitpid(pid, &status, WNOHANG);
    if (w == pid) break;
    if (w < 0 && errno != EINTR) break;
    if (std::chrono::steady_clock::now() >= deadline) {
      result.timed_out = true;
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      return result;
    }
    ::usleep(1000);
  }
  ::kill(-pid, SIGKILL);  // stray grandchildren
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.signaled = true;
    result.exit_code = WTERMSIG(status);
  }
  return result;
}

}  // namespace forge::detail
