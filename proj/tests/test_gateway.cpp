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

#include <chrono>
#include <fstream>
#include <map>
#include <thread>

#include "corpus.hpp"
#include "forge/error.hpp"
#include "forge/gateway.hpp"

using namespace forge;
using forge::testing::fixture;
using forge::testing::mock_runner_path;

namespace {

TaskSpec add_task() {
  TaskSpec t;
  t.task_id = "add";
  t.reference_source = fixture("g1_add_reference.py");
  t.seed = 5;
  return t;
}

GatewayConfig mock_config(double budget = 10.0) {
  GatewayConfig c;
  c.runner_cmd = mock_runner_path();
  c.budget_seconds = budget;
  return c;
}

std::string directive(const std::string& d) { return "# mock: " + d + "\n" + fixture("g1_add.py"); }

}  // namespace

TEST(RunnerProtocol, RequestFieldsOnTheWire) {
  RunnerRequest r;
  r.reference_source = "ref";
  r.candidate_source = "cand";
  r.seed = 3;
  nlohmann::json j = r;
  for (const char* key : {"reference_source", "candidate_source", "seed", "repetitions", "warmups", "atol", "rtol",
                          "time"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  auto back = j.get<RunnerRequest>();
  EXPECT_EQ(back.candidate_source, "cand");
  EXPECT_EQ(back.repetitions, 20);
  EXPECT_EQ(back.warmups, 3);
}

TEST(RunnerProtocol, ReplyInvariants) {
  auto ok = parse_runner_reply(
      R"({"compiled":true,"outputs_match":true,"runtime_candidate":0.5,"runtime_reference":1.0,"device":"cuda:1"})");
  EXPECT_TRUE(ok.outputs_match);
  EXPECT_EQ(ok.device, "cuda:1");
  EXPECT_THROW(parse_runner_reply(R"({"compiled":false,"outputs_match":true})"), RunnerError);
  EXPECT_THROW(parse_runner_reply(R"({"compiled":true,"runtime_candidate":-1})"), RunnerError);
  EXPECT_THROW(parse_runner_reply("nope"), RunnerError);
  EXPECT_THROW(parse_runner_reply(R"({"outputs_match":false})"), RunnerError);
  auto dropped = parse_runner_reply(R"({"compiled":false,"runtime_candidate":1.0,"error_text":"x"})");
  EXPECT_FALSE(dropped.runtime_candidate);
}

TEST(Speedup, RatioAndGating) {
  ExecutionReport r;
  r.compiled = r.outputs_match = true;
  r.runtime_reference = 2e-3;
  r.runtime_candidate = 1e-3;
  EXPECT_EQ(compute_correct(r), 1);
  EXPECT_DOUBLE_EQ(compute_speedup(r, 1), 2.0);
  EXPECT_EQ(compute_speedup(r, 0), 0.0);
  r.outputs_match = false;
  EXPECT_EQ(compute_correct(r), 0);
}

TEST(Speedup, TimerFloor) {
  ExecutionReport r;
  r.compiled = r.outputs_match = true;
  r.runtime_reference = 1e-3;
  r.runtime_candidate = 0.0;
  EXPECT_DOUBLE_EQ(compute_speedup(r, 1), 1e-3 / kTimerFloorSeconds);
  r.runtime_candidate.reset();
  EXPECT_EQ(compute_speedup(r, 1), 0.0);
}

TEST(Gateway, MockSpeedup) {
  ExecutionGateway gw(mock_config());
  auto r = gw.run_candidate(add_task(), directive("speedup=2"));
  EXPECT_TRUE(r.compiled);
  EXPECT_TRUE(r.outputs_match);
  EXPECT_NEAR(compute_speedup(r, compute_correct(r)), 2.0, 1e-12);
  EXPECT_EQ(r.device, "cuda:0");
  EXPECT_EQ(gw.requests_issued(), 1u);
}

TEST(Gateway, CompileErrorAndMismatch) {
  ExecutionGateway gw(mock_config());
  auto c = gw.run_candidate(add_task(), directive("compile_error"));
  EXPECT_FALSE(c.compiled);
  ASSERT_TRUE(c.error_text);
  auto w = gw.run_candidate(add_task(), directive("wrong"));
  EXPECT_TRUE(w.compiled);
  EXPECT_FALSE(w.outputs_match);
}

TEST(Gateway, TimeoutKillsRunner) {
  ExecutionGateway gw(mock_config(0.5));
  auto start = std::chrono::steady_clock::now();
  auto r = gw.run_candidate(add_task(), directive("hang"));
  auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_FALSE(r.compiled);
  ASSERT_TRUE(r.error_text);
  EXPECT_EQ(*r.error_text, "timeout");
  EXPECT_LT(elapsed, 5.0);
}

TEST(Gateway, CrashKeepsStderr) {
  ExecutionGateway gw(mock_config());
  auto r = gw.run_candidate(add_task(), directive("crash"));
  EXPECT_FALSE(r.compiled);
  ASSERT_TRUE(r.error_text);
  EXPECT_NE(r.error_text->find("segmentation fault in candidate"), std::string::npos);
}

TEST(Gateway, GarbageAndSilentReplies) {
  ExecutionGateway gw(mock_config());
  auto g = gw.run_candidate(add_task(), directive("garbage"));
  EXPECT_FALSE(g.compiled);
  EXPECT_TRUE(g.error_text);
  auto s = gw.run_candidate(add_task(), directive("silent"));
  EXPECT_FALSE(s.compiled);
  EXPECT_TRUE(s.error_text);
}

TEST(Gateway, MemoryCapApplies) {
  auto c = mock_config();
  c.memory_cap_bytes = std::uint64_t{64} << 20;
  ExecutionGateway capped(c);
  auto r = capped.run_candidate(add_task(), directive("alloc=512"));
  EXPECT_FALSE(r.compiled);
  ExecutionGateway roomy(mock_config());
  auto ok = roomy.run_candidate(add_task(), directive("alloc=16"));
  EXPECT_TRUE(ok.compiled);
}

TEST(Gateway, UntimedRunsOmitRuntimes) {
  auto c = mock_config();
  c.time = false;
  ExecutionGateway gw(c);
  auto r = gw.run_candidate(add_task(), directive("speedup=3"));
  EXPECT_TRUE(r.outputs_match);
  EXPECT_FALSE(r.runtime_candidate);
}

TEST(Gateway, MissingRunnerCommand) {
  unsetenv("FORGE_RUNNER_CMD");
  ExecutionGateway gw(GatewayConfig{});
  EXPECT_THROW(gw.run_candidate(add_task(), "x"), ConfigError);
}

TEST(Gateway, RunnerFromEnvironment) {
  setenv("FORGE_RUNNER_CMD", mock_runner_path().c_str(), 1);
  ExecutionGateway gw(GatewayConfig{});
  EXPECT_TRUE(gw.run_candidate(add_task(), directive("speedup=1")).compiled);
  unsetenv("FORGE_RUNNER_CMD");
}

TEST(Gateway, OneTimedRunPerDevice) {
  auto dir = forge::testing::scratch_dir("gateway");
  const std::string log = (dir / "spans").string();
  // Records start/end stamps so overlapping runs on one device show up.
  auto c = mock_config();
  c.runner_cmd = "echo start $FORGE_DEVICE $(date +%s%N) >> " + log + "; " + mock_runner_path() +
                 "; echo end $FORGE_DEVICE $(date +%s%N) >> " + log;
  c.devices = {"cuda:0", "cuda:1"};
  ExecutionGateway gw(c);
  std::vector<std::thread> threads;
  for (int i = 0; i < 6; ++i) {
    threads.emplace_back([&] { gw.run_candidate(add_task(), directive("speedup=1")); });
  }
  for (auto& t : threads) t.join();

  std::ifstream in(log);
  std::map<std::string, int> open;
  std::string what, device;
  long long stamp;
  int events = 0;
  while (in >> what >> device >> stamp) {
    ++events;
    if (what == "start") {
      EXPECT_EQ(open[device], 0) << "overlapping timed runs on " << device;
      ++open[device];
    } else {
      --open[device];
    }
  }
  EXPECT_EQ(events, 12);
}

TEST(DevicePool, LeasesReturn) {
  DevicePool pool({"a"});
  {
    auto lease = pool.acquire();
    EXPECT_EQ(lease.device(), "a");
  }
  auto again = pool.acquire();
  EXPECT_EQ(again.device(), "a");
  EXPECT_THROW(DevicePool({}), ConfigError);
}
