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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "forge/verdict.hpp"

namespace forge {

enum class Metric { Valid, Compiled, Correct, Fast };

/// One task's samples in sample_index order.
struct TaskSamples {
  std::string task_id;
  std::vector<VerdictRecord> samples;
};

/// Groups by task_id (sorted) and orders samples by sample_index. Duplicate
/// (task_id, sample_index) pairs are a SchemaError. With skip_unjudged,
/// samples whose judge was unavailable are dropped; `skipped` counts them.
std::vector<TaskSamples> group_by_task(std::span<const VerdictRecord> verdicts, bool skip_unjudged = false,
                                       std::size_t* skipped = nullptr);

/// Gated 0/1 indicator of one sample. robust=false replaces the func gate
/// with 1 and reads the ungated execution bits when they were recorded.
int indicator(const VerdictRecord& v, Metric metric, double p = 0.0, bool robust = true);
double gated_speedup(const VerdictRecord& v, bool robust = true);

/// (1/N) sum_n max over the first k samples of the indicator. Throws
/// InsufficientSamples when any task has fewer than k samples or k < 1.
double pass_at_k(std::span<const TaskSamples> tasks, int k, Metric metric, double p = 0.0, bool robust = true);

/// (1/N) sum_n max over the first k samples of the gated speedup.
double mean_speedup(std::span<const TaskSamples> tasks, int k, bool robust = true);

/// Combinatorial estimator 1 - C(n-c, k)/C(n, k) over all n samples.
double pass_at_k_unbiased(std::span<const TaskSamples> tasks, int k, Metric metric, double p = 0.0,
                          bool robust = true);

struct EvalOptions {
  bool robust = true;
  bool unbiased = false;
  /// Tasks with fewer than k samples (after skipping unjudged samples) use
  /// all they have instead of raising InsufficientSamples.
  bool allow_short = false;
};

struct TaskRow {
  std::string task_id;
  std::size_t samples = 0;
  int valid = 0;
  int compiled = 0;
  int correct = 0;
  std::vector<int> fast;
  double best_speedup = 0.0;
};

struct MetricsSummary {
  std::string label;
  int k = 1;
  std::size_t N = 0;
  double valid = 0.0;
  double compiled = 0.0;
  double correct = 0.0;
  std::vector<double> fast_p;
  std::vector<double> fast;
  double mean_speedup = 0.0;
  bool robust = true;
  bool unbiased = false;
  std::size_t skipped = 0;
  std::vector<TaskRow> rows;
};

/// All metrics at one k. OpenMP parallel over tasks with an ordered reduce.
MetricsSummary summarize(std::span<const TaskSamples> tasks, int k, std::span<const double> fast_p,
                         const EvalOptions& options = {});
MetricsSummary summarize_serial(std::span<const TaskSamples> tasks, int k, std::span<const double> fast_p,
                                const EvalOptions& options = {});

void to_json(nlohmann::json& j, const MetricsSummary& s);
void from_json(const nlohmann::json& j, MetricsSummary& s);

enum class ReportLayout { Table, Json, Markdown };

/// Renders summaries as rows. Summaries sharing (label, k) with both
/// robust settings are paired into one row, the syntax-only figures in
/// "w/o robust" columns. An empty list renders as an empty document.
std::string render_report(std::span<const MetricsSummary> summaries, ReportLayout layout);

}  // namespace forge
