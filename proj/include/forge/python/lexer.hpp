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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace forge::python {

struct Location {
  int line = 1;
  int col = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, Location loc)
      : std::runtime_error(std::to_string(loc.line) + ":" + std::to_string(loc.col) + ": " + message),
        loc_(loc) {}

  Location location() const { return loc_; }

 private:
  Location loc_;
};

enum class TokenKind : std::uint8_t {
  Name,
  Number,
  String,
  Op,
  Newline,
  Indent,
  Dedent,
  EndMarker,
};

struct Token {
  TokenKind kind = TokenKind::EndMarker;
  std::string text;  // verbatim source slice; strings keep prefix and quotes
  Location loc;
};

const char* to_string(TokenKind kind);

bool is_keyword(std::string_view word);

/// Tokenizes Python 3 source. Follows the reference tokenizer's rules for
/// logical lines: blank and comment-only lines emit nothing, bracketed
/// regions and backslash continuations join physical lines, and INDENT /
/// DEDENT tokens track the indentation stack. Throws ParseError on
/// inconsistent dedents, unterminated strings, or stray characters.
std::vector<Token> tokenize(std::string_view source);

}  // namespace forge::python
