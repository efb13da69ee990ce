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

#include <optional>
#include <string>
#include <string_view>

#include "forge/gateway.hpp"
#include "forge/judge.hpp"
#include "forge/lint.hpp"
#include "forge/response.hpp"
#include "forge/verdict.hpp"

namespace forge {

struct VerifyOptions {
  /// Stop after the functionality check (compiled/correct/speedup stay 0).
  bool execute = true;
  /// Also execute syntax-valid candidates that failed func and record the
  /// outcome in VerdictRecord::ungated.
  bool ungated = false;
};

/// Everything the cascade looked at for one candidate.
struct CandidateOutcome {
  VerdictRecord verdict;
  std::optional<lint::LintReport> lint;
  std::optional<JudgeVerdict> judge;
  std::optional<ExecutionReport> execution;
  /// First stage that rejected the candidate: "segment", "syntax", "func",
  /// "compiled", "correct"; empty when it passed all of them.
  std::string rejected_at;
  std::string detail;
};

/// syntax -> func (rule AND judge) -> compiled -> correct -> speedup.
/// Stages after the first failure are not run and their bits stay 0. A
/// judge outage sets func=0 and marks verdict.judge_unavailable.
CandidateOutcome verify_source(const TaskSpec& task, std::string_view code, std::string task_id,
                               std::uint64_t sample_index, Judge& judge, ExecutionGateway* gateway,
                               const VerifyOptions& options = {}, const lint::LintOptions& lint_options = {});

/// Segments the response first; a missing code block fails every stage.
CandidateOutcome verify_response(const TaskSpec& task, const CandidateResponse& response, Judge& judge,
                                 ExecutionGateway* gateway, const VerifyOptions& options = {},
                                 const lint::LintOptions& lint_options = {});

}  // namespace forge
