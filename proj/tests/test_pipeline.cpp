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

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "forge/error.hpp"
#include "forge/jsonl.hpp"
#include "forge/pipeline.hpp"
#include "forge/records.hpp"
#include "corpus.hpp"

using namespace forge;
namespace fs = std::filesystem;

namespace {

std::size_t count_lines(const fs::path& p) {
  if (!fs::exists(p)) return 0;
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

struct Rig {
  fs::path dir;
  fs::path log;
  PipelineConfig config;

  Rig(const std::string& tag, std::size_t tasks, std::size_t samples, std::uint64_t seed = 1) {
    dir = forge::testing::scratch_dir(tag);
    forge::testing::write_corpus(dir, forge::testing::make_corpus(tasks, samples, seed));
    log = dir / "runner.log";
    ::setenv("FORGE_MOCK_RUNNER_LOG", log.c_str(), 1);
    config.tasks = dir / "tasks.jsonl";
    config.responses = dir / "responses.jsonl";
    config.out_dir = dir / "out";
    config.runner_cmd = forge::testing::mock_runner_path();
    config.budget_seconds = 10;
    config.repetitions = 3;
    config.warmups = 0;
    config.k = {1, 2};
    config.workers = 2;
  }
  ~Rig() { ::unsetenv("FORGE_MOCK_RUNNER_LOG"); }
};

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST(Config, Settings) {
  PipelineConfig c;
  apply_setting(c, "mode", "\"uniform\"");
  apply_setting(c, "beta", "0.25");
  apply_setting(c, "k", "[1, 5, 10]");
  apply_setting(c, "robust", "off");
  apply_setting(c, "devices", "[\"cuda:0\", \"cuda:1\"]");
  apply_setting(c, "timeout", "30");
  EXPECT_EQ(c.reward_mode, RewardMode::Uniform);
  EXPECT_EQ(c.beta, 0.25);
  EXPECT_EQ(c.k, (std::vector<int>{1, 5, 10}));
  EXPECT_FALSE(c.robust);
  EXPECT_EQ(c.devices.size(), 2u);
  EXPECT_EQ(c.budget_seconds, 30.0);
  EXPECT_THROW(apply_setting(c, "colour", "1"), ConfigError);
  EXPECT_THROW(apply_setting(c, "alpha", "lots"), ConfigError);
  EXPECT_THROW(apply_setting(c, "robust", "maybe"), ConfigError);
  EXPECT_THROW(apply_setting(c, "mode", "fancy"), ConfigError);
}

TEST(Config, FileWithSectionsAndComments) {
  auto dir = forge::testing::scratch_dir("config");
  write(dir / "forge.toml", "# pipeline\n[rewards]\nalpha = 0.3  # plan weight\njudge = \"stub # not a comment\"\n\n");
  auto c = load_config(dir / "forge.toml");
  EXPECT_EQ(c.alpha, 0.3);
  EXPECT_EQ(c.judge, "stub # not a comment");
  write(dir / "bad.toml", "alpha = 0.3\nthis line is wrong\n");
  try {
    load_config(dir / "bad.toml");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.toml:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_config(dir / "missing.toml"), ConfigError);
}

TEST(Config, Validation) {
  PipelineConfig c;
  EXPECT_NO_THROW(validate_config(c, false));
  auto bad = [&](auto mutate) {
    PipelineConfig x;
    mutate(x);
    EXPECT_THROW(validate_config(x, false), ConfigError);
  };
  bad([](PipelineConfig& x) { x.alpha = 1.5; });
  bad([](PipelineConfig& x) { x.beta = -0.1; });
  bad([](PipelineConfig& x) { x.epsilon = 0.0; });
  bad([](PipelineConfig& x) { x.group_size = 1; });
  bad([](PipelineConfig& x) { x.k = {}; });
  bad([](PipelineConfig& x) { x.k = {0}; });
  bad([](PipelineConfig& x) { x.repetitions = 2; });
  bad([](PipelineConfig& x) { x.devices = {}; });
  bad([](PipelineConfig& x) { x.budget_seconds = 0; });
  EXPECT_THROW(validate_config(c, true), ConfigError);
}

TEST(Loaders, RejectDuplicatesAndBadReferences) {
  auto dir = forge::testing::scratch_dir("loaders");
  auto corpus = forge::testing::make_corpus(2, 2, 3);
  forge::testing::write_corpus(dir, corpus);
  EXPECT_EQ(load_tasks(dir / "tasks.jsonl").size(), 2u);
  EXPECT_EQ(load_responses(dir / "responses.jsonl").size(), 4u);
  std::string tasks = forge::testing::read_text(dir / "tasks.jsonl");
  write(dir / "dup.jsonl", tasks + tasks);
  EXPECT_THROW(load_tasks(dir / "dup.jsonl"), SchemaError);
  std::string responses = forge::testing::read_text(dir / "responses.jsonl");
  write(dir / "dupr.jsonl", responses + responses);
  EXPECT_THROW(load_responses(dir / "dupr.jsonl"), SchemaError);
  write(dir / "noref.jsonl",
        R"({"schema_version":1,"task_id":"x","prompt":"p","reference_source":"print(1)\n","seed":0})" "\n");
  EXPECT_THROW(load_tasks(dir / "noref.jsonl"), SchemaError);
}

TEST(Pipeline, VerifyWritesArtifacts) {
  Rig rig("verify", 3, 4);
  auto r = run_verify(rig.config);
  ASSERT_EQ(r.verdicts.size(), 12u);
  for (std::size_t i = 1; i < r.verdicts.size(); ++i) {
    const auto& a = r.verdicts[i - 1];
    const auto& b = r.verdicts[i];
    EXPECT_TRUE(a.task_id < b.task_id || (a.task_id == b.task_id && a.sample_index < b.sample_index));
  }
  for (const auto& v : r.verdicts) EXPECT_TRUE(v.cascade_ok());
  EXPECT_EQ(r.resumed, 0u);
  EXPECT_EQ(r.executed, count_lines(rig.log));
  auto out = rig.config.out_dir;
  EXPECT_EQ(count_lines(out / "verdicts.jsonl"), 12u);
  EXPECT_EQ(count_lines(out / "findings.jsonl"), 12u);
  EXPECT_TRUE(fs::exists(out / "runner.jsonl"));
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
  for (const char* name : {"verdicts.jsonl", "findings.jsonl", "runner.jsonl"}) {
    std::ifstream in(out / name);
    for (std::string line; std::getline(in, line);) EXPECT_FALSE(nlohmann::json::parse(line, nullptr, false).is_discarded()) << name;
  }
  auto manifest = nlohmann::json::parse(forge::testing::read_text(out / "manifest.json"));
  EXPECT_EQ(manifest.at("completed").size(), 3u);
}

TEST(Pipeline, ResumeSkipsCompletedTasks) {
  Rig rig("resume", 3, 3);
  auto first = run_verify(rig.config);
  std::size_t calls = count_lines(rig.log);
  auto second = run_verify(rig.config);
  EXPECT_EQ(count_lines(rig.log), calls);
  EXPECT_EQ(second.executed, 0u);
  EXPECT_EQ(second.resumed, 9u);
  EXPECT_EQ(forge::testing::read_text(rig.config.out_dir / "verdicts.jsonl"), jsonl::dump_records(first.verdicts));

  rig.config.resume = false;
  auto third = run_verify(rig.config);
  EXPECT_EQ(third.resumed, 0u);
  EXPECT_EQ(count_lines(rig.log), calls + third.executed);
}

TEST(Pipeline, ChangedInputsInvalidateManifest) {
  Rig rig("fingerprint", 2, 3);
  run_verify(rig.config);
  rig.config.repetitions = 4;
  auto r = run_verify(rig.config);
  EXPECT_EQ(r.resumed, 0u);
}

TEST(Pipeline, EmptyCorpus) {
  auto dir = forge::testing::scratch_dir("empty");
  write(dir / "tasks.jsonl", "");
  write(dir / "responses.jsonl", "");
  PipelineConfig c;
  c.tasks = dir / "tasks.jsonl";
  c.responses = dir / "responses.jsonl";
  c.out_dir = dir / "out";
  c.runner_cmd = forge::testing::mock_runner_path();
  c.k = {1};
  auto r = run_pipeline(c);
  EXPECT_TRUE(r.verify.verdicts.empty());
  EXPECT_EQ(count_lines(c.out_dir / "verdicts.jsonl"), 0u);
  EXPECT_EQ(count_lines(c.out_dir / "rewards.jsonl"), 0u);
  auto m = nlohmann::json::parse(forge::testing::read_text(c.out_dir / "metrics.json"));
  EXPECT_EQ(m.at("summaries").at(0).at("N"), 0);
}

TEST(Pipeline, UnknownTaskIsSchemaError) {
  Rig rig("unknown", 1, 1);
  write(rig.dir / "extra.jsonl", forge::testing::read_text(rig.config.responses));
  auto text = forge::testing::read_text(rig.config.responses);
  auto j = nlohmann::json::parse(text.substr(0, text.find('\n')));
  j["task_id"] = "nobody";
  write(rig.config.responses, text + j.dump() + "\n");
  EXPECT_THROW(run_verify(rig.config), SchemaError);
}

TEST(Pipeline, RewardsFromTokens) {
  Rig rig("rewards", 2, 4);
  rig.config.tokens = rig.dir / "tokens.jsonl";
  auto result = run_pipeline(rig.config);
  auto responses = load_responses(rig.config.responses);
  auto tokens = load_tokens(rig.config.tokens, responses);
  EXPECT_EQ(tokens.size(), 8u);
  auto rows = compute_reward_rows(result.verify.verdicts, tokens, rig.config);
  ASSERT_EQ(rows.size(), 8u);
  double sum_plan = 0;
  for (const auto& row : rows) {
    EXPECT_EQ(row.at("mode"), "hierarchical");
    EXPECT_TRUE(row.contains("J"));
    EXPECT_TRUE(row.contains("F_plan"));
    sum_plan += row.at("A_plan").get<double>();
  }
  EXPECT_NEAR(sum_plan, 0.0, 1e-12);
  EXPECT_EQ(count_lines(rig.config.out_dir / "rewards.jsonl"), 8u);

  rig.config.reward_mode = RewardMode::Uniform;
  rig.config.beta = 0.5;
  for (const auto& row : compute_reward_rows(result.verify.verdicts, {}, rig.config)) {
    EXPECT_EQ(row.at("mode"), "uniform");
    EXPECT_FALSE(row.contains("J"));
    EXPECT_TRUE(row.contains("A"));
  }
  rig.config.group_size = 3;
  EXPECT_ANY_THROW(compute_reward_rows(result.verify.verdicts, {}, rig.config));
}

TEST(Pipeline, NonRobustAddsAblation) {
  Rig rig("ablation", 2, 3);
  rig.config.robust = false;
  rig.config.k = {1};
  auto r = run_pipeline(rig.config);
  ASSERT_EQ(r.metrics.size(), 2u);
  EXPECT_TRUE(r.metrics[0].robust);
  EXPECT_FALSE(r.metrics[1].robust);
  EXPECT_GE(r.metrics[1].valid, r.metrics[0].valid);
  for (const auto& v : r.verify.verdicts) {
    if (v.syntax) {
      EXPECT_TRUE(v.ungated.has_value());
    }
  }
}

TEST(Pipeline, Deterministic) {
  Rig a("det-a", 4, 3, 77);
  a.config.tokens = a.dir / "tokens.jsonl";
  run_pipeline(a.config);
  Rig b("det-b", 4, 3, 77);
  b.config.tokens = b.dir / "tokens.jsonl";
  b.config.workers = 1;
  run_pipeline(b.config);
  for (const char* name : {"verdicts.jsonl", "rewards.jsonl", "metrics.json", "findings.jsonl"}) {
    EXPECT_EQ(forge::testing::read_text(a.config.out_dir / name), forge::testing::read_text(b.config.out_dir / name)) << name;
  }
}
