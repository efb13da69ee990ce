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

#include <fstream>

#include "corpus.hpp"
#include "forge/error.hpp"
#include "forge/jsonl.hpp"
#include "forge/records.hpp"

using namespace forge;
using nlohmann::json;

namespace {

VerdictRecord verdict(int s, int f, int c, int k, double sp) {
  VerdictRecord v;
  v.task_id = "t";
  v.syntax = s;
  v.func = f;
  v.compiled = c;
  v.correct = k;
  v.speedup = sp;
  return v;
}

}  // namespace

TEST(Cascade, AcceptsOrderedBits) {
  EXPECT_TRUE(verdict(0, 0, 0, 0, 0).cascade_ok());
  EXPECT_TRUE(verdict(1, 1, 1, 1, 2.5).cascade_ok());
  EXPECT_TRUE(verdict(1, 1, 1, 0, 0).cascade_ok());
}

TEST(Cascade, RejectsBrokenOrdering) {
  EXPECT_FALSE(verdict(0, 1, 0, 0, 0).cascade_ok());
  EXPECT_FALSE(verdict(1, 0, 1, 0, 0).cascade_ok());
  EXPECT_FALSE(verdict(1, 1, 0, 1, 0).cascade_ok());
  EXPECT_FALSE(verdict(1, 1, 1, 0, 1.2).cascade_ok());
  EXPECT_FALSE(verdict(1, 1, 1, 1, -1).cascade_ok());
  EXPECT_FALSE(verdict(2, 1, 1, 1, 1).cascade_ok());
  EXPECT_FALSE(verdict(1, 1, 1, 1, std::nan("")).cascade_ok());
}

TEST(Cascade, UngatedBoundsGated) {
  auto v = verdict(1, 0, 0, 0, 0);
  v.ungated = VerdictRecord::Ungated{1, 1, 3.0};
  EXPECT_TRUE(v.cascade_ok());
  v.ungated = VerdictRecord::Ungated{0, 1, 3.0};
  EXPECT_FALSE(v.cascade_ok());
  auto w = verdict(1, 1, 1, 1, 2.0);
  w.ungated = VerdictRecord::Ungated{1, 0, 0.0};
  EXPECT_FALSE(w.cascade_ok());
}

TEST(VerdictJson, RoundTrip) {
  auto v = verdict(1, 1, 1, 1, 1.75);
  v.sample_index = 9;
  v.ungated = VerdictRecord::Ungated{1, 1, 1.75};
  json j = v;
  EXPECT_EQ(j["schema_version"], kSchemaVersion);
  auto back = j.get<VerdictRecord>();
  EXPECT_EQ(back.sample_index, 9u);
  EXPECT_EQ(back.speedup, 1.75);
  ASSERT_TRUE(back.ungated);
  EXPECT_EQ(back.ungated->correct, 1);
}

TEST(VerdictJson, AcceptsBooleanBits) {
  json j = json::parse(R"({"task_id":"a","sample_index":0,"syntax":true,"func":true,"compiled":false,
                            "correct":false,"speedup":0})");
  auto v = j.get<VerdictRecord>();
  EXPECT_EQ(v.syntax, 1);
  EXPECT_EQ(v.compiled, 0);
}

TEST(VerdictJson, RejectsInconsistentRecords) {
  json j = json::parse(R"({"task_id":"a","sample_index":0,"syntax":0,"func":1,"compiled":0,"correct":0,"speedup":0})");
  EXPECT_THROW(j.get<VerdictRecord>(), SchemaError);
  json k = json::parse(R"({"schema_version":2,"task_id":"a","sample_index":0,"syntax":0,"func":0,"compiled":0,
                           "correct":0,"speedup":0})");
  EXPECT_THROW(k.get<VerdictRecord>(), SchemaError);
}

TEST(ResponseJson, RoundTripWithOffsets) {
  CandidateResponse r;
  r.task_id = "x";
  r.sample_index = 3;
  r.raw_text = render_response("p", "c");
  segment_in_place(r);
  r.token_offsets = std::vector<ByteSpan>{{0, 2}, {2, 5}};
  json j = r;
  auto back = j.get<CandidateResponse>();
  EXPECT_EQ(back.raw_text, r.raw_text);
  EXPECT_EQ(back.plan_span, r.plan_span);
  EXPECT_EQ(back.code_span, r.code_span);
  ASSERT_TRUE(back.token_offsets);
  EXPECT_EQ(back.token_offsets->size(), 2u);
  EXPECT_EQ((*back.token_offsets)[1], (ByteSpan{2, 5}));
}

TEST(TaskJson, RoundTrip) {
  TaskSpec t;
  t.task_id = "k1";
  t.prompt = "p";
  t.reference_source = "class Model: pass";
  t.difficulty = 2;
  t.seed = 11;
  auto back = json(t).get<TaskSpec>();
  EXPECT_EQ(back.task_id, "k1");
  EXPECT_EQ(back.difficulty, 2);
  EXPECT_EQ(back.seed, 11u);
}

TEST(ExecutionReportJson, NullRuntimes) {
  ExecutionReport r;
  r.compiled = true;
  json j = r;
  EXPECT_TRUE(j["runtime_candidate"].is_null());
  auto back = j.get<ExecutionReport>();
  EXPECT_FALSE(back.runtime_candidate);
  EXPECT_TRUE(back.compiled);
}

TEST(Jsonl, LineNumberedErrors) {
  auto dir = forge::testing::scratch_dir("jsonl");
  {
    std::ofstream out(dir / "v.jsonl");
    out << R"({"task_id":"a","sample_index":0,"syntax":1,"func":1,"compiled":1,"correct":1,"speedup":1.5})" << "\n"
        << "\n"
        << "{not json\n";
  }
  try {
    jsonl::read(dir / "v.jsonl");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
}

TEST(Jsonl, RecordErrorsNameTheRecord) {
  auto dir = forge::testing::scratch_dir("jsonl");
  {
    std::ofstream out(dir / "v.jsonl");
    out << R"({"task_id":"a","sample_index":0,"syntax":1,"func":1,"compiled":1,"correct":1,"speedup":1.5})" << "\n"
        << R"({"task_id":"a","sample_index":1,"syntax":1})" << "\n";
  }
  try {
    jsonl::read_records<VerdictRecord>(dir / "v.jsonl");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("record 2"), std::string::npos) << e.what();
  }
}

TEST(Jsonl, AtomicWriteReplaces) {
  auto dir = forge::testing::scratch_dir("jsonl");
  jsonl::write_atomic(dir / "a.jsonl", "one\n");
  jsonl::write_atomic(dir / "a.jsonl", "two\n");
  EXPECT_EQ(forge::testing::read_text(dir / "a.jsonl"), "two\n");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1u);
}

TEST(Jsonl, DumpIsOneObjectPerLine) {
  std::string text = jsonl::dump({json{{"a", 1}}, json{{"b", "x\ny"}}});
  EXPECT_EQ(text, "{\"a\":1}\n{\"b\":\"x\\ny\"}\n");
  EXPECT_EQ(jsonl::parse(text, "mem").size(), 2u);
}

TEST(LintReportJson, CarriesDerivedFields) {
  lint::LintReport r;
  r.syntax_ok = true;
  json j = r;
  EXPECT_EQ(j["func_rule"], false);
  EXPECT_EQ(j["rule_valid"], false);
}
