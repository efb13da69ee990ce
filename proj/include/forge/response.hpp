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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

/// Half-open byte range [begin, end) into a response's raw text.
struct ByteSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return end == begin; }
  std::size_t overlap(const ByteSpan& other) const {
    std::size_t lo = begin > other.begin ? begin : other.begin;
    std::size_t hi = end < other.end ? end : other.end;
    return hi > lo ? hi - lo : 0;
  }
  friend bool operator==(const ByteSpan&, const ByteSpan&) = default;
};

enum class TokenClass : std::uint8_t { Plan, Code, Other };

const char* to_string(TokenClass cls);
TokenClass token_class_from_string(std::string_view name);

struct TaskSpec {
  std::string task_id;
  std::string prompt;
  std::string reference_source;
  std::optional<int> difficulty;  // 1..3 when labeled
  std::uint64_t seed = 0;
};

/// True iff the reference defines `class Model`, `get_inputs` and
/// `get_init_inputs`. Line based, so mis-indented references still validate.
bool has_reference_entry_points(std::string_view reference_source);

struct CandidateResponse {
  std::string task_id;
  std::uint64_t sample_index = 0;
  std::string raw_text;
  ByteSpan plan_span;
  ByteSpan code_span;
  std::optional<std::vector<ByteSpan>> token_offsets;

  std::string_view plan() const;
  std::string_view code() const;
};

struct Segmentation {
  ByteSpan plan;
  ByteSpan code;
};

/// Splits raw model output into the `<think>` plan and the code fence.
///
/// The plan is everything between the first `<think>` and the next
/// `</think>` (tags excluded); it is empty when no think block exists. The
/// code is the body of the first ``` fence that starts after the plan; when
/// several fences follow, the first whose body carries a `jit` decorator
/// wins. An unterminated final fence runs to the end of the text. An
/// unterminated `<think>` swallows the rest of the text as plan.
///
/// Throws NoCodeBlock when no fence follows the plan.
Segmentation segment_response(std::string_view raw_text);

/// Same spans without the NoCodeBlock check: a response lacking a fence
/// keeps its plan and gets an empty code span at the end of the text.
Segmentation segment_response_lenient(std::string_view raw_text);

/// Fills plan_span / code_span from raw_text.
void segment_in_place(CandidateResponse& response);

/// Renders plan and code in the training output template
/// ("<think>\n...\n</think>\n```python\n...\n```").
std::string render_response(std::string_view plan, std::string_view code);

/// Assigns each caller-supplied token span to plan, code or other. A token
/// touching neither span is `other`; otherwise the class holding more of its
/// bytes wins, ties going to `code`. Throws InvalidArgument when offsets are
/// missing or fall outside raw_text.
std::vector<TokenClass> classify_tokens(const CandidateResponse& response);

bool is_valid_utf8(std::string_view text);

}  // namespace forge
