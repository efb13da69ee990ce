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
#include <optional>
#include <string>

namespace forge {

struct Tolerance {
  double atol = 1e-2;
  double rtol = 1e-2;
};

/// What the kernel runner reports for one (reference, candidate) pair.
/// Runtimes are trimmed means in seconds and present only for timed runs
/// that compiled.
struct ExecutionReport {
  bool compiled = false;
  bool outputs_match = false;
  std::optional<double> runtime_candidate;
  std::optional<double> runtime_reference;
  Tolerance match_tolerance;
  std::string device;
  std::optional<std::string> error_text;
};

/// The five verifier bits for one candidate. Cascade order: each bit is
/// bounded by the one before it and speedup is nonzero only when correct.
struct VerdictRecord {
  std::string task_id;
  std::uint64_t sample_index = 0;
  int syntax = 0;
  int func = 0;
  int compiled = 0;
  int correct = 0;
  double speedup = 0.0;
  /// The judge could not be reached; func was forced to 0.
  bool judge_unavailable = false;

  /// Execution outcome without the func gate. Only recorded for the
  /// syntax-only ablation, where candidates failing func still execute.
  struct Ungated {
    int compiled = 0;
    int correct = 0;
    double speedup = 0.0;
  };
  std::optional<Ungated> ungated;

  bool cascade_ok() const;
};

}  // namespace forge
