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

#include "forge/verifier.hpp"

#include "forge/error.hpp"

namespace forge {

namespace {

CandidateOutcome run_cascade(const TaskSpec& task, std::string_view code, std::string task_id,
                             std::uint64_t sample_index, Judge& judge, ExecutionGateway* gateway,
                             const VerifyOptions& options, const lint::LintOptions& lint_options) {
  CandidateOutcome out;
  VerdictRecord& v = out.verdict;
  v.task_id = std::move(task_id);
  v.sample_index = sample_index;

  out.lint = lint::lint_functionality(code, lint_options);
  const lint::LintReport& lint = *out.lint;
  v.syntax = lint.syntax_ok ? 1 : 0;
  if (!v.syntax) {
    out.rejected_at = "syntax";
    out.detail = lint.parse_error.empty() ? "no triton.jit kernel" : lint.parse_error;
    return out;
  }

  bool func = lint.rule_valid();
  if (!func) {
    if (!lint.forbidden_calls.empty()) {
      out.detail = "delegates to " + lint.forbidden_calls.front().pattern;
    } else if (!lint.dummy_kernel_flags.empty()) {
      out.detail = lint.dummy_kernel_flags.front().kernel + ": " + lint.dummy_kernel_flags.front().reason;
    } else {
      out.detail = "no kernel launch reachable from forward";
    }
  } else {
    try {
      out.judge = judge.judge(task, code, lint);
      func = out.judge->semantically_valid;
      if (!func) out.detail = "judge: " + out.judge->rationale;
    } catch (const JudgeUnavailable& e) {
      func = false;
      v.judge_unavailable = true;
      out.detail = e.what();
    }
  }
  v.func = func ? 1 : 0;

  const bool run_gated = func && options.execute && gateway;
  const bool run_ungated = !func && options.ungated && options.execute && gateway;
  if (!run_gated && !run_ungated) {
    if (!func) out.rejected_at = "func";
    return out;
  }

  out.execution = gateway->run_candidate(task, code);
  const ExecutionReport& rep = *out.execution;
  VerdictRecord::Ungated exec;
  exec.compiled = rep.compiled ? 1 : 0;
  exec.correct = compute_correct(rep);
  exec.speedup = compute_speedup(rep, exec.correct);
  if (run_gated) {
    v.compiled = exec.compiled;
    v.correct = exec.correct;
    v.speedup = exec.speedup;
    if (!v.compiled) {
      out.rejected_at = "compiled";
    } else if (!v.correct) {
      out.rejected_at = "correct";
    }
    if (rep.error_text) out.detail = *rep.error_text;
  } else {
    out.rejected_at = "func";
  }
  if (options.ungated) v.ungated = exec;
  return out;
}

}  // namespace

CandidateOutcome verify_source(const TaskSpec& task, std::string_view code, std::string task_id,
                               std::uint64_t sample_index, Judge& judge, ExecutionGateway* gateway,
                               const VerifyOptions& options, const lint::LintOptions& lint_options) {
  CandidateOutcome out =
      run_cascade(task, code, std::move(task_id), sample_index, judge, gateway, options, lint_options);
  if (options.ungated && !out.verdict.ungated) out.verdict.ungated = VerdictRecord::Ungated{};
  return out;
}

CandidateOutcome verify_response(const TaskSpec& task, const CandidateResponse& response, Judge& judge,
                                 ExecutionGateway* gateway, const VerifyOptions& options,
                                 const lint::LintOptions& lint_options) {
  CandidateResponse seg = response;
  try {
    if (!is_valid_utf8(seg.raw_text)) throw NoCodeBlock("response is not valid UTF-8");
    segment_in_place(seg);
  } catch (const NoCodeBlock& e) {
    CandidateOutcome out;
    out.verdict.task_id = response.task_id;
    out.verdict.sample_index = response.sample_index;
    if (options.ungated) out.verdict.ungated = VerdictRecord::Ungated{};
    out.rejected_at = "segment";
    out.detail = e.what();
    return out;
  }
  return verify_source(task, seg.code(), seg.task_id, seg.sample_index, judge, gateway, options, lint_options);
}

}  // namespace forge
