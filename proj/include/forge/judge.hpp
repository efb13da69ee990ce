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

#include <chrono>
#include <functional>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>

#include "forge/http.hpp"
#include "forge/lint.hpp"
#include "forge/response.hpp"

namespace forge {

struct JudgeVerdict {
  bool semantically_valid = false;
  std::string rationale;
  std::string judge_model;
  double latency_ms = 0.0;
};

/// The model-based half of the functionality check.
class Judge {
 public:
  virtual ~Judge() = default;
  /// Throws JudgeUnavailable when no verdict can be obtained.
  virtual JudgeVerdict judge(const TaskSpec& task, std::string_view code, const lint::LintReport& lint) = 0;
  virtual std::string name() const = 0;
};

/// Offline stand-in: rejects exactly when the linter saw a dummy kernel or a
/// forbidden call.
class StubJudge final : public Judge {
 public:
  JudgeVerdict judge(const TaskSpec& task, std::string_view code, const lint::LintReport& lint) override;
  std::string name() const override { return "stub"; }
};

JudgeVerdict stub_judge(const TaskSpec& task, std::string_view code, const lint::LintReport& lint);

struct RemoteJudgeConfig {
  std::string url;
  std::string model;
  std::string api_key;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  int max_in_flight = 8;
  double timeout_seconds = 120.0;

  /// FORGE_JUDGE_URL, FORGE_JUDGE_MODEL, FORGE_JUDGE_KEY. Throws ConfigError
  /// when the URL or model is unset.
  static RemoteJudgeConfig from_env();
};

struct JudgePrompt {
  std::string system;
  std::string user;
};

JudgePrompt build_judge_prompt(const TaskSpec& task, std::string_view code, const lint::LintReport& lint);

/// Extracts {"valid": bool, "reason": str} from a model reply, tolerating a
/// surrounding code fence or prose. Throws MalformedJudgeReply.
JudgeVerdict parse_judge_reply(std::string_view content);

/// Chat-completions judge at temperature 0. Transport failures are retried
/// with exponential backoff; a malformed reply is retried once. Either path
/// ends in JudgeUnavailable. At most max_in_flight requests run at once.
class RemoteJudge final : public Judge {
 public:
  using Sleep = std::function<void(std::chrono::milliseconds)>;

  explicit RemoteJudge(RemoteJudgeConfig config, http::PostFn post = {}, Sleep sleep = {});

  JudgeVerdict judge(const TaskSpec& task, std::string_view code, const lint::LintReport& lint) override;
  std::string name() const override { return "remote:" + config_.model; }

 private:
  RemoteJudgeConfig config_;
  http::PostFn post_;
  Sleep sleep_;
  std::counting_semaphore<1024> slots_;
};

/// "stub" or "remote" (configured from the environment).
std::unique_ptr<Judge> make_judge(std::string_view mode);

}  // namespace forge
