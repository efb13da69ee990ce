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

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "cli.hpp"
#include "forge/error.hpp"
#include "forge/jsonl.hpp"
#include "forge/metrics.hpp"
#include "corpus.hpp"

using namespace forge;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
};

/// Runs the forge binary through the shell with stdout captured.
Outcome forge_cmd(const std::string& args, const fs::path& dir) {
  fs::path out = dir / "stdout.txt";
  std::string cmd = std::string(FORGE_CLI_BINARY) + " " + args + " > " + out.string() + " 2> " +
                    (dir / "stderr.txt").string();
  int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, forge::testing::read_text(out)};
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(cli::exit_code_for(SchemaError("x")), 1);
  EXPECT_EQ(cli::exit_code_for(ConfigError("x")), 1);
  EXPECT_EQ(cli::exit_code_for(SimplexViolation("x")), 1);
  EXPECT_EQ(cli::exit_code_for(InsufficientSamples("x")), 1);
  EXPECT_EQ(cli::exit_code_for(MissingCell("x")), 1);
  EXPECT_EQ(cli::exit_code_for(JudgeUnavailable("x")), 2);
  EXPECT_EQ(cli::exit_code_for(RunnerError("x")), 2);
  EXPECT_EQ(cli::exit_code_for(std::runtime_error("x")), 2);
}

TEST(Cli, LintExitCodes) {
  auto dir = forge::testing::scratch_dir("cli-lint");
  write(dir / "good.py", forge::testing::fixture("g1_add.py"));
  write(dir / "bmm.py", forge::testing::fixture("b2_torch_bmm.py"));
  write(dir / "broken.py", "def f(:\n");
  auto good = forge_cmd("lint " + (dir / "good.py").string(), dir);
  EXPECT_EQ(good.code, 0);
  auto report = nlohmann::json::parse(good.out);
  EXPECT_TRUE(report.contains("forbidden_calls"));
  EXPECT_EQ(forge_cmd("lint " + (dir / "bmm.py").string(), dir).code, 1);
  EXPECT_EQ(forge_cmd("lint " + (dir / "broken.py").string(), dir).code, 2);
  EXPECT_EQ(forge_cmd("lint - < " + (dir / "good.py").string(), dir).code, 0);
}

TEST(Cli, BadUsageIsValidation) {
  auto dir = forge::testing::scratch_dir("cli-usage");
  EXPECT_EQ(forge_cmd("", dir).code, 1);
  EXPECT_EQ(forge_cmd("frobnicate", dir).code, 1);
  EXPECT_EQ(forge_cmd("eval", dir).code, 1);
  EXPECT_EQ(forge_cmd("--help", dir).code, 0);
  EXPECT_EQ(forge_cmd("mix --p 0.6,0.6 --tasks /nonexistent", dir).code, 1);
}

TEST(Cli, RunEvalReportRoundTrip) {
  auto dir = forge::testing::scratch_dir("cli-run");
  forge::testing::write_corpus(dir, forge::testing::make_corpus(3, 3, 11));
  std::string common = "--tasks " + (dir / "tasks.jsonl").string() + " --responses " +
                       (dir / "responses.jsonl").string() + " --runner-cmd " + forge::testing::mock_runner_path() +
                       " --timeout 10 --repetitions 3 --warmups 0 --k 1,3";
  auto run = forge_cmd("run " + common + " --out " + (dir / "out").string() + " --tokens " +
                           (dir / "tokens.jsonl").string() + " --format markdown",
                       dir);
  ASSERT_EQ(run.code, 0) << forge::testing::read_text(dir / "stderr.txt");
  EXPECT_EQ(run.out.rfind("| model | k |", 0), 0u);

  auto verdicts = (dir / "out" / "verdicts.jsonl").string();
  auto eval = forge_cmd("eval --verdicts " + verdicts + " --k 1,3 --robust off --format json --out " +
                            (dir / "m.json").string(),
                        dir);
  ASSERT_EQ(eval.code, 0);
  EXPECT_EQ(nlohmann::json::parse(eval.out).size(), 4u);
  EXPECT_EQ(forge_cmd("eval --verdicts " + verdicts + " --k 4 --out " + (dir / "x.json").string(), dir).code, 1);
  EXPECT_EQ(forge_cmd("eval --verdicts " + verdicts + " --k 4 --allow-short on --out " + (dir / "x.json").string(),
                      dir)
                .code,
            0);

  auto report = forge_cmd("report " + (dir / "m.json").string(), dir);
  ASSERT_EQ(report.code, 0);
  EXPECT_NE(report.out.find("w/o robust"), std::string::npos);

  auto reward = forge_cmd("reward --verdicts " + verdicts + " --mode uniform --beta 0.5 --out " +
                              (dir / "r.jsonl").string(),
                          dir);
  ASSERT_EQ(reward.code, 0);
  auto rows = forge::testing::read_text(dir / "r.jsonl");
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 9);
  EXPECT_EQ(forge_cmd("reward --verdicts " + verdicts + " --beta 2 --mode uniform", dir).code, 1);
}

TEST(Cli, LabelMixAndRank) {
  auto dir = forge::testing::scratch_dir("cli-mix");
  forge::testing::write_corpus(dir, forge::testing::make_corpus(4, 1, 5));
  auto labels = (dir / "labels.jsonl").string();
  ASSERT_EQ(forge_cmd("label --tasks " + (dir / "tasks.jsonl").string() + " --out " + labels, dir).code, 0);
  auto mix_out = (dir / "mix.jsonl").string();
  ASSERT_EQ(forge_cmd("mix --p 1,0 --n 50 --seed 3 --labels " + labels + " --out " + mix_out, dir).code, 0);
  auto text = forge::testing::read_text(mix_out);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 50);
  EXPECT_EQ(forge_cmd("mix --p 0,1 --labels " + labels + " --out " + mix_out, dir).code, 1);

  auto metrics = [&](const std::string& name, double correct) {
    MetricsSummary s;
    s.correct = correct;
    nlohmann::json doc = {{"schema_version", 1}, {"summaries", nlohmann::json::array({s})}};
    write(dir / name, doc.dump());
  };
  metrics("a1.json", 0.2);
  metrics("a2.json", 0.2);
  metrics("b1.json", 0.5);
  metrics("b2.json", 0.1);
  write(dir / "mixtures.json", R"({"test_subsets": [1, 2], "mixtures": [
      {"p": [1, 0], "metrics": {"1": "a1.json", "2": "a2.json"}},
      {"p": [0.5, 0.5], "metrics": {"1": "b1.json", "2": "b2.json"}}]})");
  auto rank = forge_cmd("report --mixtures " + (dir / "mixtures.json").string(), dir);
  ASSERT_EQ(rank.code, 0) << forge::testing::read_text(dir / "stderr.txt");
  auto ranked = nlohmann::json::parse(rank.out);
  EXPECT_EQ(ranked.at(0).at("index"), 1);
  write(dir / "short.json", R"({"test_subsets": [1, 2, 3], "mixtures": [
      {"p": [1, 0], "metrics": {"1": "a1.json", "2": "a2.json"}}]})");
  EXPECT_EQ(forge_cmd("report --mixtures " + (dir / "short.json").string(), dir).code, 1);
}

TEST(Cli, InProcessRun) {
  auto dir = forge::testing::scratch_dir("cli-inproc");
  write(dir / "good.py", forge::testing::fixture("g1_add.py"));
  std::string path = (dir / "good.py").string();
  std::vector<std::string> args{"forge", "lint", path};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  ::testing::internal::CaptureStdout();
  int code = cli::run(static_cast<int>(argv.size()), argv.data());
  ::testing::internal::GetCapturedStdout();
  EXPECT_EQ(code, 0);
}
