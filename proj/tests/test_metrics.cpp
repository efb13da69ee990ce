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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "forge/error.hpp"
#include "forge/metrics.hpp"
#include "oracles.hpp"

using namespace forge;

namespace {

struct RandomCorpus {
  std::vector<VerdictRecord> flat;
  std::map<std::string, std::vector<VerdictRecord>> by_task;
};

RandomCorpus random_corpus(std::mt19937_64& rng, int tasks, int samples, bool ungated) {
  RandomCorpus c;
  for (int t = 0; t < tasks; ++t) {
    std::string id = "task-" + std::to_string(t);
    std::vector<std::uint64_t> idx(static_cast<std::size_t>(samples));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    for (auto i : idx) {
      auto v = oracle::random_verdict(rng, id, i, ungated);
      c.flat.push_back(v);
      c.by_task[id].push_back(v);
    }
  }
  std::shuffle(c.flat.begin(), c.flat.end(), rng);
  return c;
}

VerdictRecord rec(const std::string& task, std::uint64_t i, int s, int f, int c, int k, double sp) {
  VerdictRecord v;
  v.task_id = task;
  v.sample_index = i;
  v.syntax = s;
  v.func = f;
  v.compiled = c;
  v.correct = k;
  v.speedup = sp;
  return v;
}

const std::vector<double> kFast{0.0, 1.0, 2.0};

}  // namespace

TEST(Metrics, MatchesOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    bool robust = trial % 2 == 0;
    auto c = random_corpus(rng, 1 + trial % 7, 6, !robust);
    auto tasks = group_by_task(c.flat);
    for (int k : {1, 3, 6}) {
      EvalOptions o;
      o.robust = robust;
      auto s = summarize(tasks, k, kFast, o);
      EXPECT_DOUBLE_EQ(s.valid, oracle::metric_at_k(c.by_task, k, "valid", 0, robust));
      EXPECT_DOUBLE_EQ(s.compiled, oracle::metric_at_k(c.by_task, k, "compiled", 0, robust));
      EXPECT_DOUBLE_EQ(s.correct, oracle::metric_at_k(c.by_task, k, "correct", 0, robust));
      for (std::size_t i = 0; i < kFast.size(); ++i) {
        EXPECT_DOUBLE_EQ(s.fast[i], oracle::metric_at_k(c.by_task, k, "fast", kFast[i], robust));
      }
      EXPECT_NEAR(s.mean_speedup, oracle::metric_at_k(c.by_task, k, "speedup", 0, robust), 1e-12);
    }
  }
}

TEST(Metrics, MonotoneInKAndCascade) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto c = random_corpus(rng, 5, 8, false);
    auto tasks = group_by_task(c.flat);
    MetricsSummary prev;
    for (int k = 1; k <= 8; ++k) {
      auto s = summarize(tasks, k, kFast);
      EXPECT_GE(s.valid, s.compiled);
      EXPECT_GE(s.compiled, s.correct);
      EXPECT_GE(s.correct, s.fast[0]);
      EXPECT_GE(s.fast[0], s.fast[1]);
      EXPECT_GE(s.fast[1], s.fast[2]);
      if (k > 1) {
        EXPECT_GE(s.valid, prev.valid);
        EXPECT_GE(s.correct, prev.correct);
        EXPECT_GE(s.fast[1], prev.fast[1]);
        EXPECT_GE(s.mean_speedup, prev.mean_speedup);
      }
      prev = s;
    }
  }
}

TEST(Metrics, DroppingRobustNeverLowers) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    auto c = random_corpus(rng, 6, 4, trial % 2 == 0);
    auto tasks = group_by_task(c.flat);
    EvalOptions plain;
    plain.robust = false;
    for (int k : {1, 4}) {
      auto r = summarize(tasks, k, kFast);
      auto p = summarize(tasks, k, kFast, plain);
      EXPECT_GE(p.valid, r.valid);
      EXPECT_GE(p.compiled, r.compiled);
      EXPECT_GE(p.correct, r.correct);
      for (std::size_t i = 0; i < kFast.size(); ++i) EXPECT_GE(p.fast[i], r.fast[i]);
    }
  }
}

TEST(Metrics, FastIsStrict) {
  std::vector<VerdictRecord> v{rec("a", 0, 1, 1, 1, 1, 1.0)};
  auto tasks = group_by_task(v);
  auto s = summarize(tasks, 1, kFast);
  EXPECT_EQ(s.correct, 1.0);
  EXPECT_EQ(s.fast[0], 1.0);
  EXPECT_EQ(s.fast[1], 0.0);
  EXPECT_EQ(s.mean_speedup, 1.0);
}

TEST(Metrics, FuncGateAppliesOnlyWhenRobust) {
  VerdictRecord v = rec("a", 0, 1, 0, 0, 0, 0.0);
  v.ungated = VerdictRecord::Ungated{1, 1, 2.5};
  EXPECT_EQ(indicator(v, Metric::Correct), 0);
  EXPECT_EQ(indicator(v, Metric::Correct, 0, false), 1);
  EXPECT_EQ(indicator(v, Metric::Fast, 2.5, false), 0);
  EXPECT_EQ(gated_speedup(v, false), 2.5);
  EXPECT_EQ(indicator(v, Metric::Valid, 0, false), 1);
}

TEST(Metrics, UsesFirstKBySampleIndex) {
  std::vector<VerdictRecord> v{rec("a", 1, 1, 1, 1, 1, 3.0), rec("a", 0, 0, 0, 0, 0, 0.0)};
  auto tasks = group_by_task(v);
  EXPECT_EQ(pass_at_k(tasks, 1, Metric::Correct), 0.0);
  EXPECT_EQ(pass_at_k(tasks, 2, Metric::Correct), 1.0);
  EXPECT_EQ(mean_speedup(tasks, 2), 3.0);
}

TEST(Metrics, UnbiasedMatchesEnumeration) {
  for (int n = 1; n <= 8; ++n) {
    for (int c = 0; c <= n; ++c) {
      std::vector<VerdictRecord> v;
      for (int i = 0; i < n; ++i) {
        v.push_back(i < c ? rec("t", static_cast<std::uint64_t>(i), 1, 1, 1, 1, 1.5)
                          : rec("t", static_cast<std::uint64_t>(i), 1, 1, 0, 0, 0.0));
      }
      auto tasks = group_by_task(v);
      for (int k = 1; k <= n; ++k) {
        EXPECT_NEAR(pass_at_k_unbiased(tasks, k, Metric::Correct), oracle::hit_probability_enumerated(n, c, k), 1e-12)
            << n << " " << c << " " << k;
      }
    }
  }
}

TEST(Metrics, UnbiasedSummaryKeepsLiteralSpeedup) {
  std::mt19937_64 rng(21);
  auto c = random_corpus(rng, 4, 5, false);
  auto tasks = group_by_task(c.flat);
  EvalOptions o;
  o.unbiased = true;
  auto s = summarize(tasks, 2, kFast, o);
  EXPECT_TRUE(s.unbiased);
  EXPECT_NEAR(s.correct, pass_at_k_unbiased(tasks, 2, Metric::Correct), 1e-12);
  EXPECT_NEAR(s.mean_speedup, mean_speedup(tasks, 2), 1e-12);
}

TEST(Metrics, ShortTasks) {
  std::vector<VerdictRecord> v{rec("a", 0, 1, 1, 1, 1, 1.0), rec("b", 0, 0, 0, 0, 0, 0), rec("b", 1, 1, 1, 1, 1, 2.0)};
  auto tasks = group_by_task(v);
  EXPECT_THROW(summarize(tasks, 2, kFast), InsufficientSamples);
  EXPECT_THROW(pass_at_k(tasks, 0, Metric::Valid), InsufficientSamples);
  EvalOptions o;
  o.allow_short = true;
  auto s = summarize(tasks, 2, kFast, o);
  EXPECT_EQ(s.correct, 1.0);
  EXPECT_EQ(s.mean_speedup, 1.5);
}

TEST(Metrics, GroupingRules) {
  std::vector<VerdictRecord> dup{rec("a", 0, 1, 1, 1, 1, 1.0), rec("a", 0, 1, 1, 1, 1, 1.0)};
  EXPECT_THROW(group_by_task(dup), SchemaError);
  auto unjudged = rec("a", 1, 1, 0, 0, 0, 0);
  unjudged.judge_unavailable = true;
  std::vector<VerdictRecord> v{rec("b", 0, 1, 1, 1, 1, 1.0), unjudged, rec("a", 0, 1, 1, 1, 1, 1.0)};
  std::size_t skipped = 0;
  auto tasks = group_by_task(v, true, &skipped);
  EXPECT_EQ(skipped, 1u);
  ASSERT_EQ(tasks.size(), 2u);
  EXPECT_EQ(tasks[0].task_id, "a");
  EXPECT_EQ(tasks[0].samples.size(), 1u);
  EXPECT_EQ(group_by_task(v)[0].samples.size(), 2u);
}

TEST(Metrics, ParallelMatchesSerial) {
  std::mt19937_64 rng(31);
  auto c = random_corpus(rng, 300, 5, true);
  auto tasks = group_by_task(c.flat);
  for (bool robust : {true, false}) {
    EvalOptions o;
    o.robust = robust;
    auto a = summarize(tasks, 3, kFast, o);
    auto b = summarize_serial(tasks, 3, kFast, o);
    EXPECT_EQ(nlohmann::json(a).dump(), nlohmann::json(b).dump());
  }
}

TEST(Metrics, EmptyCorpus) {
  std::vector<TaskSamples> none;
  auto s = summarize(none, 1, kFast);
  EXPECT_EQ(s.N, 0u);
  EXPECT_EQ(s.correct, 0.0);
}

TEST(Metrics, JsonRoundTrip) {
  std::mt19937_64 rng(41);
  auto c = random_corpus(rng, 3, 4, false);
  auto s = summarize(group_by_task(c.flat), 2, kFast);
  s.label = "model-x";
  nlohmann::json j = s;
  EXPECT_TRUE(j.at("fast").contains("fast_1"));
  EXPECT_EQ(j.at("estimator"), "max_over_k");
  auto back = j.get<MetricsSummary>();
  EXPECT_EQ(nlohmann::json(back).dump(), j.dump());
}

TEST(Report, Layouts) {
  EXPECT_EQ(render_report(std::vector<MetricsSummary>{}, ReportLayout::Table), "");
  std::mt19937_64 rng(51);
  auto c = random_corpus(rng, 3, 2, true);
  auto tasks = group_by_task(c.flat);
  std::vector<MetricsSummary> ss;
  ss.push_back(summarize(tasks, 1, kFast));
  EvalOptions plain;
  plain.robust = false;
  ss.push_back(summarize(tasks, 1, kFast, plain));
  for (auto& s : ss) s.label = "m";

  std::string table = render_report(ss, ReportLayout::Table);
  EXPECT_NE(table.find("valid (w/o robust)"), std::string::npos);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 2);

  std::string md = render_report(ss, ReportLayout::Markdown);
  EXPECT_EQ(md.rfind("| model | k |", 0), 0u);
  EXPECT_NE(md.find("---:"), std::string::npos);

  auto arr = nlohmann::json::parse(render_report(ss, ReportLayout::Json));
  EXPECT_EQ(arr.size(), 2u);

  std::string robust_only = render_report(std::span(ss.data(), 1), ReportLayout::Table);
  EXPECT_EQ(robust_only.find("w/o robust"), std::string::npos);
}
