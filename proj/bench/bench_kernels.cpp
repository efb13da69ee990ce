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

// Serial reference vs. OpenMP variants of the batch kernels.

#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "forge/lint.hpp"
#include "forge/metrics.hpp"
#include "forge/reward.hpp"
#include "oracles.hpp"

using namespace forge;

namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::filesystem::path(FORGE_FIXTURE_DIR) / name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lint_inputs(std::size_t n) {
  const char* names[] = {"g1_add.py", "b1_extern_convolution.py", "b2_torch_bmm.py", "c3_ex2_conv3d_module.py",
                         "c3_ex3_identity_store.py"};
  std::vector<std::string> base;
  for (const char* f : names) base.push_back(read_fixture(f));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(base[i % base.size()]);
  return out;
}

std::vector<TokenGroup> token_groups(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ratio(0.2, 5.0);
  std::uniform_int_distribution<int> cls(0, 2);
  std::vector<TokenGroup> out;
  for (std::size_t g = 0; g < n; ++g) {
    std::vector<VerdictRecord> verdicts;
    TokenGroup group;
    for (int i = 0; i < 8; ++i) {
      verdicts.push_back(oracle::random_verdict(rng, "t", static_cast<std::uint64_t>(i)));
      SampleTokens s;
      for (int t = 0; t < 512; ++t) {
        s.ratios.push_back(ratio(rng));
        s.classes.push_back(static_cast<TokenClass>(cls(rng)));
      }
      group.samples.push_back(std::move(s));
    }
    group.bundle = hierarchical_rewards(verdicts);
    out.push_back(std::move(group));
  }
  return out;
}

std::vector<TaskSamples> eval_tasks(std::size_t n) {
  std::mt19937_64 rng(2);
  std::vector<VerdictRecord> flat;
  for (std::size_t t = 0; t < n; ++t) {
    for (int i = 0; i < 10; ++i) {
      flat.push_back(oracle::random_verdict(rng, "task-" + std::to_string(t), static_cast<std::uint64_t>(i), true));
    }
  }
  return group_by_task(flat);
}

const std::vector<double> kFast{1.0, 2.0};

void BM_LintSerial(benchmark::State& state) {
  auto codes = lint_inputs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lint::lint_batch_serial(codes));
}
void BM_LintParallel(benchmark::State& state) {
  auto codes = lint_inputs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lint::lint_batch(codes));
}

void BM_ObjectiveSerial(benchmark::State& state) {
  auto groups = token_groups(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hierarchical_objective_batch_serial(groups, 0.1, 0.2));
}
void BM_ObjectiveParallel(benchmark::State& state) {
  auto groups = token_groups(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hierarchical_objective_batch(groups, 0.1, 0.2));
}

void BM_SummarizeSerial(benchmark::State& state) {
  auto tasks = eval_tasks(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(summarize_serial(tasks, 10, kFast));
}
void BM_SummarizeParallel(benchmark::State& state) {
  auto tasks = eval_tasks(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(summarize(tasks, 10, kFast));
}

}  // namespace

BENCHMARK(BM_LintSerial)->Arg(64)->Arg(256);
BENCHMARK(BM_LintParallel)->Arg(64)->Arg(256);
BENCHMARK(BM_ObjectiveSerial)->Arg(64)->Arg(512);
BENCHMARK(BM_ObjectiveParallel)->Arg(64)->Arg(512);
BENCHMARK(BM_SummarizeSerial)->Arg(250)->Arg(2000);
BENCHMARK(BM_SummarizeParallel)->Arg(250)->Arg(2000);

BENCHMARK_MAIN();
