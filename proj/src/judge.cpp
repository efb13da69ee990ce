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

#include "forge/judge.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <nlohmann/json.hpp>

#include "forge/error.hpp"
#include "forge/log.hpp"

namespace forge {

namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<1024>& s_;
};

}  // namespace

JudgeVerdict stub_judge(const TaskSpec&, std::string_view, const lint::LintReport& lint) {
  JudgeVerdict v;
  v.judge_model = "stub";
  v.semantically_valid = lint.dummy_kernel_flags.empty() && lint.forbidden_calls.empty();
  if (!lint.forbidden_calls.empty()) {
    v.rationale = "delegates to " + lint.forbidden_calls.front().pattern;
  } else if (!lint.dummy_kernel_flags.empty()) {
    const auto& f = lint.dummy_kernel_flags.front();
    v.rationale = f.kernel + ": " + f.reason;
  } else {
    v.rationale = "no delegation or dummy kernel found";
  }
  return v;
}

JudgeVerdict StubJudge::judge(const TaskSpec& task, std::string_view code, const lint::LintReport& lint) {
  return stub_judge(task, code, lint);
}

RemoteJudgeConfig RemoteJudgeConfig::from_env() {
  RemoteJudgeConfig c;
  c.url = env_or_empty("FORGE_JUDGE_URL");
  c.model = env_or_empty("FORGE_JUDGE_MODEL");
  c.api_key = env_or_empty("FORGE_JUDGE_KEY");
  if (c.url.empty()) throw ConfigError("FORGE_JUDGE_URL is not set");
  if (c.model.empty()) throw ConfigError("FORGE_JUDGE_MODEL is not set");
  return c;
}

JudgePrompt build_judge_prompt(const TaskSpec& task, std::string_view code, const lint::LintReport& lint) {
  JudgePrompt p;
  p.system =
      "You review GPU kernel submissions. A submission must reimplement the reference PyTorch module "
      "with Triton kernels that perform the core computation themselves. It is invalid if the real work "
      "is delegated to PyTorch or library calls (torch.matmul, torch.nn modules, F.conv2d, cuBLAS or "
      "inductor extern kernels), if a kernel only copies its input or writes constants, or if results "
      "are hardcoded for particular shapes.\n"
      "Reply with a single JSON object and nothing else: {\"valid\": true|false, \"reason\": \"<one sentence>\"}.\n\n"
      "Reference implementation:\n```python\n" +
      task.reference_source + "\n```";
  std::string findings;
  for (const auto& f : lint.forbidden_calls) {
    findings += "- line " + std::to_string(f.line) + ": call to " + f.pattern + "\n";
  }
  for (const auto& f : lint.dummy_kernel_flags) findings += "- kernel " + f.kernel + ": " + f.reason + "\n";
  for (const auto& h : lint.hardcode_flags) findings += "- " + h.site + ": " + h.kind + " " + h.literal + "\n";
  p.user = "Submission:\n```python\n" + std::string(code) + "\n```\n";
  if (!findings.empty()) p.user += "\nStatic analysis notes:\n" + findings;
  p.user += "\nIs this a genuine Triton implementation of the reference?";
  return p;
}

JudgeVerdict parse_judge_reply(std::string_view content) {
  auto try_parse = [](std::string_view text) -> std::optional<nlohmann::json> {
    auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    return j;
  };
  auto j = try_parse(content);
  if (!j) {
    auto open = content.find('{');
    auto close = content.rfind('}');
    if (open != std::string_view::npos && close != std::string_view::npos && close > open) {
      j = try_parse(content.substr(open, close - open + 1));
    }
  }
  if (!j) throw MalformedJudgeReply("judge reply is not a JSON object");
  auto valid = j->find("valid");
  if (valid == j->end() || !valid->is_boolean()) throw MalformedJudgeReply("judge reply lacks boolean 'valid'");
  JudgeVerdict v;
  v.semantically_valid = valid->get<bool>();
  if (auto reason = j->find("reason"); reason != j->end() && reason->is_string()) v.rationale = reason->get<std::string>();
  return v;
}

RemoteJudge::RemoteJudge(RemoteJudgeConfig config, http::PostFn post, Sleep sleep)
    : config_(std::move(config)),
      post_(post ? std::move(post) : http::make_poster(config_.timeout_seconds)),
      sleep_(sleep ? std::move(sleep) : Sleep([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      slots_(std::clamp(config_.max_in_flight, 1, 1024)) {}

JudgeVerdict RemoteJudge::judge(const TaskSpec& task, std::string_view code, const lint::LintReport& lint) {
  JudgePrompt prompt = build_judge_prompt(task, code, lint);
  http::ChatRequest req{config_.url, config_.model, config_.api_key, prompt.system, prompt.user, 0.0, 1.0, true};

  SlotGuard slot(slots_);
  int transport_failures = 0;
  int malformed = 0;
  auto backoff = config_.initial_backoff;
  std::string last_error;
  for (;;) {
    auto start = std::chrono::steady_clock::now();
    try {
      JudgeVerdict v = parse_judge_reply(http::chat(post_, req));
      v.judge_model = config_.model;
      v.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      return v;
    } catch (const MalformedJudgeReply& e) {
      last_error = e.what();
      if (++malformed > 1) break;
      log::warn(std::string("judge reply malformed, retrying: ") + e.what());
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      last_error = e.what();
      if (++transport_failures > config_.max_retries) break;
      log::warn(std::string("judge request failed, backing off: ") + e.what());
      sleep_(backoff);
      backoff *= 2;
    }
  }
  throw JudgeUnavailable("judge unavailable: " + last_error);
}

std::unique_ptr<Judge> make_judge(std::string_view mode) {
  if (mode == "stub") return std::make_unique<StubJudge>();
  if (mode == "remote") return std::make_unique<RemoteJudge>(RemoteJudgeConfig::from_env());
  throw ConfigError("unknown judge mode '" + std::string(mode) + "' (expected stub or remote)");
}

}  // namespace forge
