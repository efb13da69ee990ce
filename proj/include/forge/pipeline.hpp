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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "forge/metrics.hpp"
#include "forge/reward.hpp"
#include "forge/verdict.hpp"
#include "forge/verifier.hpp"

namespace forge {

struct PipelineConfig {
  std::filesystem::path tasks;
  std::filesystem::path responses;
  std::filesystem::path tokens;  // optional per-token ratios
  std::filesystem::path out_dir = "forge-out";

  std::string judge = "stub";
  std::string runner_cmd;  // FORGE_RUNNER_CMD when empty
  double budget_seconds = 120.0;
  std::uint64_t memory_cap_bytes = std::uint64_t{8} << 30;
  int repetitions = 20;
  int warmups = 3;
  Tolerance tolerance;
  std::vector<std::string> devices{"cuda:0"};
  std::size_t workers = 4;

  std::size_t group_size = 0;  // 0: every task's samples form one group
  RewardMode reward_mode = RewardMode::Hierarchical;
  double alpha = 0.1;
  double beta = 1.0;
  double epsilon = 0.2;
  bool normalize_std = false;

  std::vector<int> k{10};
  std::vector<double> fast_p{1.0, 2.0};
  bool robust = true;  // false also computes the syntax-only ablation
  bool unbiased = false;
  bool allow_short = false;
  bool resume = true;
  std::uint64_t seed = 0;
};

/// Applies one `key = value` setting. Values use TOML spelling: quoted or
/// bare strings, numbers, true/false, and [a, b] lists. Throws ConfigError.
void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value);

/// Reads a key = value file. `#` starts a comment; `[section]` headers are
/// accepted and ignored. Errors name the file and line.
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

/// Checks ranges and that input paths exist. Throws ConfigError.
void validate_config(const PipelineConfig& config, bool need_inputs = true);

std::vector<TaskSpec> load_tasks(const std::filesystem::path& path);
std::vector<CandidateResponse> load_responses(const std::filesystem::path& path);

struct VerifyResult {
  std::vector<VerdictRecord> verdicts;  // ordered by (task_id, sample_index)
  std::size_t executed = 0;             // candidates sent to the runner this run
  std::size_t resumed = 0;              // candidates restored from the manifest
};

/// Runs the verifier cascade over every response and writes
/// verdicts.jsonl, findings.jsonl and runner.jsonl into out_dir. Completed
/// tasks are recorded in manifest.json and skipped on the next run.
VerifyResult run_verify(const PipelineConfig& config);

struct TokenRecord {
  std::string task_id;
  std::uint64_t sample_index = 0;
  SampleTokens tokens;
};

std::vector<TokenRecord> load_tokens(const std::filesystem::path& path,
                                     const std::vector<CandidateResponse>& responses);

/// One row per sample: rewards, advantages, and objective terms when token
/// ratios are available. Groups are formed per task.
std::vector<nlohmann::json> compute_reward_rows(const std::vector<VerdictRecord>& verdicts,
                                                const std::vector<TokenRecord>& tokens, const PipelineConfig& config);

/// Robust summaries for every k, plus syntax-only ones when robust is off.
/// `label` names the model column of the report.
std::vector<MetricsSummary> compute_metrics(const std::vector<VerdictRecord>& verdicts, const PipelineConfig& config,
                                            const std::string& label = {});

nlohmann::json metrics_document(const std::vector<MetricsSummary>& summaries);

struct PipelineResult {
  VerifyResult verify;
  std::vector<MetricsSummary> metrics;
};

/// verify -> reward -> eval; writes rewards.jsonl and metrics.json too.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace forge
