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

#include "forge/prompts.hpp"

using namespace forge;

TEST(Prompts, LabelingTemplateText) {
  std::string_view t = prompts::difficulty_label_template();
  EXPECT_EQ(t.rfind("```\n{reference_source}\n```", 0), 0u);
  for (const char* line : {
           "Assign a kernel implementation complexity level (1, 2, or 3) of the provided reference PyTorch "
           "architecture according to the criteria below:",
           "\xE2\x80\xA2 Level 1: Single primitive operation. This level includes the foundational building blocks "
           "of AI (e.g. convolutions, matrix-vector and matrix-matrix multiplications, losses, activations, and "
           "layer normalizations).",
           "\xE2\x80\xA2 Level 2: Operator sequences.",
           "\xE2\x80\xA2 Level 3: This level includes architectures that power popular AI models, such as AlexNet "
           "and MiniGPT, collected from popular PyTorch repositories on GitHub.",
       }) {
    EXPECT_NE(t.find(line), std::string_view::npos) << line;
  }
}

TEST(Prompts, FillSubstitutesOnce) {
  EXPECT_EQ(prompts::fill("a {x} b {y} {z}", {{"x", "1"}, {"y", "{x}"}}), "a 1 b {x} {z}");
  EXPECT_EQ(prompts::fill("{", {}), "{");
  EXPECT_EQ(prompts::fill("", {{"x", "1"}}), "");
}

TEST(Prompts, LabelPromptEmbedsReference) {
  std::string p = prompts::difficulty_label("class Model: pass");
  EXPECT_EQ(p.rfind("```\nclass Model: pass\n```", 0), 0u);
  EXPECT_EQ(p.find("{reference_source}"), std::string::npos);
}

TEST(Prompts, OneShotHasExamplePair) {
  std::string p = prompts::kernelbench_one_shot("REF_SOURCE_MARKER");
  EXPECT_NE(p.find("REF_SOURCE_MARKER"), std::string::npos);
  auto trimmed = [](std::string_view v) {
    auto b = v.find_first_not_of(" \t\r\n");
    auto e = v.find_last_not_of(" \t\r\n");
    return std::string(v.substr(b, e - b + 1));
  };
  EXPECT_NE(p.find(trimmed(prompts::one_shot_example_reference())), std::string::npos);
  EXPECT_NE(p.find(trimmed(prompts::one_shot_example_kernel())), std::string::npos);
  EXPECT_NE(prompts::one_shot_example_kernel().find("triton.jit"), std::string_view::npos);
  for (const char* key : {"{example_kernel}", "{example_reference}", "{reference_source}"}) {
    EXPECT_EQ(p.find(key), std::string::npos);
  }
}

TEST(Prompts, InstructionEmbedsReference) {
  std::string p = prompts::kernelbook_instruction("REF_SOURCE_MARKER");
  EXPECT_NE(p.find("REF_SOURCE_MARKER"), std::string::npos);
  EXPECT_EQ(p.find("{reference_source}"), std::string::npos);
}
