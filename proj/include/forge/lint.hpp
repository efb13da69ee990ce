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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace forge::lint {

struct LaunchSite {
  std::string kernel;
  std::string function;  // enclosing function ("<module>" at top level)
  int line = 0;
  bool resolved = true;   // false when the subscripted name is not a discovered kernel
  bool reachable = false; // reachable from the output model's forward
};

struct ForbiddenCall {
  std::string pattern;  // catalog entry, e.g. "torch.bmm", "nn.Conv3d", "@"
  std::string call;     // resolved callee path as written after alias resolution
  std::string function;
  int line = 0;
};

struct KernelFlag {
  std::string kernel;
  std::string reason;  // "identity store", "dead computation", "no store"
  std::string detail;
  int line = 0;
};

struct HardcodeFlag {
  std::string site;     // "kernel:line"
  std::string literal;
  std::string kind;     // "constant store" or "shape constant"
};

struct LintReport {
  bool syntax_ok = false;
  std::string parse_error;  // set when the source does not parse
  std::string entry_class;  // output model class whose forward seeds reachability
  std::vector<std::string> kernels_found;
  std::vector<LaunchSite> launches_found;
  std::vector<ForbiddenCall> forbidden_calls;
  std::vector<KernelFlag> dummy_kernel_flags;
  std::vector<HardcodeFlag> hardcode_flags;  // warnings only

  bool launch_reachable() const;
  /// Rule half of the functionality check: a discovered kernel is launched
  /// from the forward path and nothing there delegates to PyTorch compute.
  bool func_rule() const { return syntax_ok && launch_reachable() && forbidden_calls.empty(); }
  /// func_rule plus no dummy-kernel findings; what `forge lint` exits on.
  bool rule_valid() const { return func_rule() && dummy_kernel_flags.empty(); }
};

struct LintOptions {
  /// Integer shape values taken from the task's input specification; kernel
  /// literals matching them are reported as hardcode warnings.
  std::vector<std::int64_t> input_shape_values;
};

/// True iff `code` parses and defines at least one `triton.jit` function
/// (decorator spelled directly, called, or reached through an import alias).
bool check_syntax(std::string_view code);

/// Full rule-based report. Never throws on bad input: parse failures give a
/// report with syntax_ok = false and parse_error set.
LintReport lint_functionality(std::string_view code, const LintOptions& options = {});

/// Dataflow findings for every kernel in `code`; empty when it does not parse.
std::vector<KernelFlag> detect_dummy_kernel(std::string_view code);

/// Shape values used by a reference's `get_inputs` (each dimension > 1 and
/// each trailing-dimension product), resolving module-level integer constants.
std::vector<std::int64_t> input_shape_values(std::string_view reference_source);

/// Lints many candidates; OpenMP parallel over candidates.
std::vector<LintReport> lint_batch(std::span<const std::string> codes, const LintOptions& options = {});
/// Serial reference for lint_batch.
std::vector<LintReport> lint_batch_serial(std::span<const std::string> codes, const LintOptions& options = {});

}  // namespace forge::lint
