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

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace forge::detail {

struct ProcessResult {
  bool timed_out = false;
  bool signaled = false;
  int exit_code = -1;  // or the signal number when signaled
  std::string out;
  std::string err;
};

struct ProcessOptions {
  double timeout_seconds = 120.0;
  std::uint64_t memory_cap_bytes = 0;  // 0 leaves the limit untouched
  std::vector<std::pair<std::string, std::string>> extra_env;
  std::size_t max_stdout = std::size_t{64} << 20;
  std::size_t max_stderr = std::size_t{1} << 20;
};

/// Runs `/bin/sh -c command` in its own process group, feeds `input` on
/// stdin, and collects stdout/stderr until exit or the deadline; on timeout
/// the whole group is killed.
ProcessResult run_shell(const std::string& command, const std::string& input, const ProcessOptions& options);

}  // namespace forge::detail
