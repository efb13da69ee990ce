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

#include "forge/python/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace forge::python {

namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False", "None",   "True",    "and",      "as",       "assert", "async",
    "await", "break",  "class",   "continue", "def",      "del",    "elif",
    "else",  "except", "finally", "for",      "from",     "global", "if",
    "import", "in",    "is",      "lambda",   "nonlocal", "not",    "or",
    "pass",  "raise",  "return",  "try",      "while",    "with",   "yield",
};

// Longest first within each length class so a linear scan finds the longest match.
constexpr std::array<std::string_view, 47> kOperators = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=",
    ">=",  "==",  "!=",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "@=",
    "+",   "-",   "*",   "/",   "%",   "@",  "&",  "|",  "^",  "~",  "<",  ">",
    "(",   ")",   "[",   "]",   "{",   "}",  ",",  ":",  ";",  ".",  "=",
};

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool is_string_prefix(std::string_view word) {
  if (word.size() > 2) return false;
  std::string lower;
  for (char c : word) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return lower == "r" || lower == "u" || lower == "b" || lower == "f" || lower == "br" ||
         lower == "rb" || lower == "fr" || lower == "rf";
}

class Lexer {
 public:
  explicit Lexer(std::string_view source) {
    src_.reserve(source.size() + 1);
    std::size_t start = 0;
    if (source.substr(0, 3) == "\xEF\xBB\xBF") start = 3;
    for (std::size_t i = start; i < source.size(); ++i) {
      if (source[i] == '\r') {
        src_.push_back('\n');
        if (i + 1 < source.size() && source[i + 1] == '\n') ++i;
      } else {
        src_.push_back(source[i]);
      }
    }
    if (src_.empty() || src_.back() != '\n') src_.push_back('\n');
  }

  std::vector<Token> run() {
    while (pos_ < src_.size()) {
      if (at_line_start_ && depth_ == 0) {
        if (!handle_indentation()) continue;
      }
      lex_in_line();
    }
    if (depth_ > 0) throw ParseError("unexpected EOF in multi-line statement", here());
    if (line_has_tokens_) emit(TokenKind::Newline, "");
    while (indents_.size() > 1) {
      indents_.pop_back();
      emit(TokenKind::Dedent, "");
    }
    emit(TokenKind::EndMarker, "");
    return std::move(tokens_);
  }

 private:
  Location here() const { return {line_, static_cast<int>(pos_ - line_start_)}; }

  void emit(TokenKind kind, std::string text, Location loc) {
    tokens_.push_back(Token{kind, std::move(text), loc});
  }
  void emit(TokenKind kind, std::string text) { emit(kind, std::move(text), here()); }

  void newline_advance() {
    ++pos_;
    ++line_;
    line_start_ = pos_;
  }

  // Returns false when the physical line was blank or comment-only and consumed.
  bool handle_indentation() {
    int width = 0;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ' ') {
        ++width;
      } else if (c == '\t') {
        width = (width / 8 + 1) * 8;
      } else if (c == '\f') {
        width = 0;
      } else {
        break;
      }
      ++pos_;
    }
    if (pos_ >= src_.size()) return false;
    char c = src_[pos_];
    if (c == '#' || c == '\n') {
      while (src_[pos_] != '\n') ++pos_;
      newline_advance();
      return false;
    }
    at_line_start_ = false;
    if (width > indents_.back()) {
      indents_.push_back(width);
      emit(TokenKind::Indent, "");
    } else if (width < indents_.back()) {
      while (width < indents_.back()) {
        indents_.pop_back();
        emit(TokenKind::Dedent, "");
      }
      if (width != indents_.back()) {
        throw ParseError("unindent does not match any outer indentation level", here());
      }
    }
    return true;
  }

  void lex_in_line() {
    char c = src_[pos_];
    if (c == ' ' || c == '\t' || c == '\f') {
      ++pos_;
      return;
    }
    if (c == '#') {
      while (src_[pos_] != '\n') ++pos_;
      return;
    }
    if (c == '\\') {
      if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
        ++pos_;
        newline_advance();
        if (pos_ >= src_.size()) throw ParseError("unexpected EOF after line continuation", here());
        return;
      }
      throw ParseError("unexpected character after line continuation character", here());
    }
    if (c == '\n') {
      if (depth_ == 0) {
        if (line_has_tokens_) emit(TokenKind::Newline, "");
        line_has_tokens_ = false;
        at_line_start_ = true;
      }
      newline_advance();
      return;
    }
    line_has_tokens_ = true;
    auto uc = static_cast<unsigned char>(c);
    if (is_ident_start(uc)) {
      lex_name_or_prefixed_string();
    } else if (std::isdigit(uc) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      lex_number();
    } else if (c == '"' || c == '\'') {
      lex_string(pos_);
    } else {
      lex_operator();
    }
  }

  char peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void lex_name_or_prefixed_string() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    std::string_view word(src_.data() + start, pos_ - start);
    if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'') && is_string_prefix(word)) {
      pos_ = start;
      lex_string(start);
      return;
    }
    emit(TokenKind::Name, std::string(word), {line_, static_cast<int>(start - line_start_)});
  }

  void lex_string(std::size_t start) {
    Location loc{line_, static_cast<int>(start - line_start_)};
    while (src_[pos_] != '"' && src_[pos_] != '\'') ++pos_;
    char quote = src_[pos_];
    bool triple = peek(1) == quote && peek(2) == quote;
    pos_ += triple ? 3 : 1;
    for (;;) {
      if (pos_ >= src_.size()) {
        throw ParseError(triple ? "unterminated triple-quoted string literal"
                                : "unterminated string literal",
                         loc);
      }
      char c = src_[pos_];
      if (c == '\\') {
        if (peek(1) == '\n') {
          ++pos_;
          newline_advance();
        } else {
          pos_ += 2;
        }
        continue;
      }
      if (c == '\n') {
        if (!triple) throw ParseError("unterminated string literal", loc);
        newline_advance();
        continue;
      }
      if (c == quote) {
        if (!triple) {
          ++pos_;
          break;
        }
        if (peek(1) == quote && peek(2) == quote) {
          pos_ += 3;
          break;
        }
      }
      ++pos_;
    }
    emit(TokenKind::String, src_.substr(start, pos_ - start), loc);
  }

  void lex_number() {
    std::size_t start = pos_;
    auto digits = [&](auto pred) {
      while (pos_ < src_.size() && (pred(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    };
    auto is_dec = [](unsigned char ch) { return std::isdigit(ch) != 0; };
    if (src_[pos_] == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
      pos_ += 2;
      digits([](unsigned char ch) { return std::isxdigit(ch) != 0; });
    } else if (src_[pos_] == '0' && (peek(1) == 'o' || peek(1) == 'O')) {
      pos_ += 2;
      digits([](unsigned char ch) { return ch >= '0' && ch <= '7'; });
    } else if (src_[pos_] == '0' && (peek(1) == 'b' || peek(1) == 'B')) {
      pos_ += 2;
      digits([](unsigned char ch) { return ch == '0' || ch == '1'; });
    } else {
      digits(is_dec);
      if (pos_ < src_.size() && src_[pos_] == '.') {
        ++pos_;
        digits(is_dec);
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t save = pos_;
        ++pos_;
        if (src_[pos_] == '+' || src_[pos_] == '-') ++pos_;
        if (std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          digits(is_dec);
        } else {
          pos_ = save;
        }
      }
      if (pos_ < src_.size() && (src_[pos_] == 'j' || src_[pos_] == 'J')) ++pos_;
    }
    if (pos_ < src_.size() && is_ident_start(static_cast<unsigned char>(src_[pos_]))) {
      throw ParseError("invalid decimal literal", here());
    }
    emit(TokenKind::Number, src_.substr(start, pos_ - start),
         {line_, static_cast<int>(start - line_start_)});
  }

  void lex_operator() {
    std::string_view rest(src_.data() + pos_, src_.size() - pos_);
    for (std::string_view op : kOperators) {
      if (rest.substr(0, op.size()) == op) {
        Location loc = here();
        pos_ += op.size();
        char c = op[0];
        if (op.size() == 1 && (c == '(' || c == '[' || c == '{')) ++depth_;
        if (op.size() == 1 && (c == ')' || c == ']' || c == '}')) {
          if (depth_ == 0) throw ParseError(std::string("unmatched '") + c + "'", loc);
          --depth_;
        }
        emit(TokenKind::Op, std::string(op), loc);
        return;
      }
    }
    throw ParseError(std::string("invalid character '") + src_[pos_] + "'", here());
  }

  std::string src_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
  int line_ = 1;
  int depth_ = 0;
  bool at_line_start_ = true;
  bool line_has_tokens_ = false;
  std::vector<int> indents_{0};
  std::vector<Token> tokens_;
};

}  // namespace

const char* to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Name: return "NAME";
    case TokenKind::Number: return "NUMBER";
    case TokenKind::String: return "STRING";
    case TokenKind::Op: return "OP";
    case TokenKind::Newline: return "NEWLINE";
    case TokenKind::Indent: return "INDENT";
    case TokenKind::Dedent: return "DEDENT";
    case TokenKind::EndMarker: return "ENDMARKER";
  }
  return "?";
}

bool is_keyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace forge::python
