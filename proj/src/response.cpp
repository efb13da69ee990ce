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

#include "forge/response.hpp"

#include <regex>

#include "forge/error.hpp"

namespace forge {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kFence = "```";

struct Fence {
  ByteSpan body;
};

std::size_t line_end(std::string_view text, std::size_t pos) {
  std::size_t nl = text.find('\n', pos);
  return nl == std::string_view::npos ? text.size() : nl;
}

// A fence line is optional indentation followed by ```; returns the offset of
// the backticks or npos.
std::size_t fence_at_line(std::string_view text, std::size_t line_begin) {
  std::size_t p = line_begin;
  while (p < text.size() && (text[p] == ' ' || text[p] == '\t')) ++p;
  if (text.substr(p, kFence.size()) == kFence) return p;
  return std::string_view::npos;
}

std::vector<Fence> find_fences(std::string_view text, std::size_t from) {
  std::vector<Fence> fences;
  std::size_t pos = from;
  while (pos < text.size()) {
    std::size_t open = text.find(kFence, pos);
    if (open == std::string_view::npos) break;
    // Opening fences start a line (or directly follow the plan, "</think>```").
    std::size_t line_start = open;
    while (line_start > from && text[line_start - 1] != '\n') --line_start;
    if (text.substr(line_start, open - line_start).find_first_not_of(" \t") != std::string_view::npos) {
      pos = open + kFence.size();
      continue;
    }
    std::size_t info_end = line_end(text, open);
    std::size_t body_begin = info_end < text.size() ? info_end + 1 : text.size();
    std::size_t body_end = text.size();
    std::size_t next = text.size();
    for (std::size_t scan = body_begin; scan < text.size();) {
      std::size_t f = fence_at_line(text, scan);
      if (f != std::string_view::npos) {
        body_end = scan > body_begin ? scan - 1 : body_begin;
        next = line_end(text, f);
        break;
      }
      std::size_t le = line_end(text, scan);
      scan = le < text.size() ? le + 1 : text.size();
    }
    fences.push_back(Fence{ByteSpan{body_begin, body_end}});
    pos = next;
  }
  return fences;
}

bool has_jit_decorator(std::string_view body) {
  static const std::regex kJit(R"((^|\n)[ \t]*@[ \t]*[A-Za-z_][\w.]*jit\b)");
  return std::regex_search(body.begin(), body.end(), kJit);
}

}  // namespace

const char* to_string(TokenClass cls) {
  switch (cls) {
    case TokenClass::Plan: return "plan";
    case TokenClass::Code: return "code";
    case TokenClass::Other: return "other";
  }
  return "other";
}

TokenClass token_class_from_string(std::string_view name) {
  if (name == "plan") return TokenClass::Plan;
  if (name == "code") return TokenClass::Code;
  if (name == "other") return TokenClass::Other;
  throw InvalidArgument("unknown token class '" + std::string(name) + "'");
}

bool has_reference_entry_points(std::string_view source) {
  static const std::regex kModel(R"((^|\n)[ \t]*class[ \t]+Model\b)");
  static const std::regex kInputs(R"((^|\n)[ \t]*def[ \t]+get_inputs[ \t]*\()");
  static const std::regex kInit(R"((^|\n)[ \t]*def[ \t]+get_init_inputs[ \t]*\()");
  return std::regex_search(source.begin(), source.end(), kModel) &&
         std::regex_search(source.begin(), source.end(), kInputs) &&
         std::regex_search(source.begin(), source.end(), kInit);
}

std::string_view CandidateResponse::plan() const {
  return std::string_view(raw_text).substr(plan_span.begin, plan_span.size());
}

std::string_view CandidateResponse::code() const {
  return std::string_view(raw_text).substr(code_span.begin, code_span.size());
}

namespace {

/// Plan span and the fences after it; `found` is false when no fence exists.
Segmentation split(std::string_view raw, bool& found) {
  Segmentation seg;
  found = false;
  std::size_t search_from = 0;
  std::size_t open = raw.find(kThinkOpen);
  if (open != std::string_view::npos) {
    std::size_t begin = open + kThinkOpen.size();
    std::size_t close = raw.find(kThinkClose, begin);
    if (close == std::string_view::npos) {
      seg.plan = {begin, raw.size()};
      seg.code = {raw.size(), raw.size()};
      return seg;
    }
    seg.plan = {begin, close};
    search_from = close + kThinkClose.size();
  }
  std::vector<Fence> fences = find_fences(raw, search_from);
  if (fences.empty()) {
    seg.code = {raw.size(), raw.size()};
    return seg;
  }
  const Fence* chosen = &fences.front();
  for (const Fence& f : fences) {
    if (has_jit_decorator(raw.substr(f.body.begin, f.body.size()))) {
      chosen = &f;
      break;
    }
  }
  seg.code = chosen->body;
  found = true;
  return seg;
}

}  // namespace

Segmentation segment_response(std::string_view raw) {
  bool found = false;
  Segmentation seg = split(raw, found);
  if (!found) {
    bool unterminated = seg.plan.end == raw.size() && raw.find(kThinkOpen) != std::string_view::npos &&
                        raw.find(kThinkClose) == std::string_view::npos;
    throw NoCodeBlock(unterminated ? "unterminated <think> block; no code follows the plan"
                                   : "no fenced code block found");
  }
  return seg;
}

Segmentation segment_response_lenient(std::string_view raw) {
  bool found = false;
  return split(raw, found);
}

void segment_in_place(CandidateResponse& response) {
  Segmentation seg = segment_response(response.raw_text);
  response.plan_span = seg.plan;
  response.code_span = seg.code;
}

std::string render_response(std::string_view plan, std::string_view code) {
  std::string out;
  out.reserve(plan.size() + code.size() + 40);
  out += kThinkOpen;
  out += plan;
  out += kThinkClose;
  out += "\n```python\n";
  out += code;
  out += "\n```\n";
  return out;
}

std::vector<TokenClass> classify_tokens(const CandidateResponse& response) {
  if (!response.token_offsets) throw InvalidArgument("classify_tokens requires token_offsets");
  std::vector<TokenClass> classes;
  classes.reserve(response.token_offsets->size());
  const std::size_t limit = response.raw_text.size();
  for (const ByteSpan& tok : *response.token_offsets) {
    if (tok.begin > tok.end || tok.end > limit) {
      throw InvalidArgument("token span [" + std::to_string(tok.begin) + ", " + std::to_string(tok.end) +
                            ") outside raw_text of " + std::to_string(limit) + " bytes");
    }
    std::size_t in_plan = tok.overlap(response.plan_span);
    std::size_t in_code = tok.overlap(response.code_span);
    if (tok.empty()) {
      // Zero-width tokens take the class of the span containing their position.
      auto inside = [&](const ByteSpan& s) { return tok.begin >= s.begin && tok.begin < s.end; };
      classes.push_back(inside(response.code_span)   ? TokenClass::Code
                        : inside(response.plan_span) ? TokenClass::Plan
                                                     : TokenClass::Other);
      continue;
    }
    if (in_plan == 0 && in_code == 0) {
      classes.push_back(TokenClass::Other);
    } else {
      classes.push_back(in_code >= in_plan ? TokenClass::Code : TokenClass::Plan);
    }
  }
  return classes;
}

bool is_valid_utf8(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    auto c = static_cast<unsigned char>(text[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= text.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    static constexpr std::uint32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += extra + 1;
  }
  return true;
}

}  // namespace forge
