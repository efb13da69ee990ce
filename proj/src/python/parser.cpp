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

#include "forge/python/parser.hpp"

#include <algorithm>
#include <set>

namespace forge::python {

namespace {

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Module parse_module() {
    Module module;
    while (peek().kind != TokenKind::EndMarker) {
      if (peek().kind == TokenKind::Newline) {
        advance();
        continue;
      }
      parse_statement(module.body);
    }
    return module;
  }

 private:
  // ---- token helpers ----

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token& advance() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at_op(std::string_view op, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::Op && t.text == op;
  }
  bool at_kw(std::string_view kw, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::Name && t.text == kw;
  }
  bool accept_op(std::string_view op) {
    if (!at_op(op)) return false;
    advance();
    return true;
  }
  bool accept_kw(std::string_view kw) {
    if (!at_kw(kw)) return false;
    advance();
    return true;
  }
  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    std::string near = t.kind == TokenKind::Op || t.kind == TokenKind::Name || t.kind == TokenKind::Number
                           ? " near '" + t.text + "'"
                           : std::string(" at ") + to_string(t.kind);
    throw ParseError(what + near, t.loc);
  }
  void expect_op(std::string_view op) {
    if (!accept_op(op)) fail("expected '" + std::string(op) + "'");
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail("expected '" + std::string(kw) + "'");
  }
  void expect(TokenKind kind) {
    if (peek().kind != kind) fail(std::string("expected ") + to_string(kind));
    advance();
  }
  std::string expect_identifier() {
    const Token& t = peek();
    if (t.kind != TokenKind::Name || is_keyword(t.text)) fail("expected identifier");
    advance();
    return t.text;
  }

  bool starts_expression(std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    switch (t.kind) {
      case TokenKind::Number:
      case TokenKind::String:
        return true;
      case TokenKind::Name:
        if (!is_keyword(t.text)) return true;
        return t.text == "not" || t.text == "lambda" || t.text == "await" || t.text == "None" ||
               t.text == "True" || t.text == "False" || t.text == "yield";
      case TokenKind::Op:
        return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" || t.text == "+" ||
               t.text == "~" || t.text == "*" || t.text == "...";
      default:
        return false;
    }
  }

  static ExprPtr make(ExprKind kind, Location loc) { return std::make_unique<Expr>(kind, loc); }
  static StmtPtr make_stmt(StmtKind kind, Location loc) { return std::make_unique<Stmt>(kind, loc); }

  // ---- target validation ----

  enum class TargetContext { Assign, AugAssign, Annotated, Delete, For };

  void check_target(const Expr& e, TargetContext ctx, bool nested = false) const {
    switch (e.kind) {
      case ExprKind::Name:
      case ExprKind::Attribute:
      case ExprKind::Subscript:
        return;
      case ExprKind::Tuple:
      case ExprKind::List:
        if (ctx == TargetContext::AugAssign || ctx == TargetContext::Annotated) break;
        for (const auto& elt : e.operands) check_target(*elt, ctx, true);
        return;
      case ExprKind::Starred:
        if (!nested || ctx == TargetContext::Delete) {
          throw ParseError("starred assignment target must be in a list or tuple", e.loc);
        }
        check_target(*e.operands[0], ctx, true);
        return;
      default:
        break;
    }
    throw ParseError("cannot assign to expression", e.loc);
  }

  // ---- statements ----

  void parse_statement(Suite& out) {
    const Token& t = peek();
    if (at_op("@")) {
      out.push_back(parse_decorated());
      return;
    }
    if (t.kind == TokenKind::Name) {
      const std::string& w = t.text;
      if (w == "def") return out.push_back(parse_funcdef({}, false));
      if (w == "class") return out.push_back(parse_classdef({}));
      if (w == "if") return out.push_back(parse_if());
      if (w == "while") return out.push_back(parse_while());
      if (w == "for") return out.push_back(parse_for(false));
      if (w == "try") return out.push_back(parse_try());
      if (w == "with") return out.push_back(parse_with(false));
      if (w == "match" && !at_op("=", 1) && !at_op(".", 1) && !at_op("(", 1)) {
        // Soft keyword: only a match statement if the whole header parses.
        std::size_t save = pos_;
        try {
          out.push_back(parse_match());
          return;
        } catch (const ParseError&) {
          if (match_header_parsed_) throw;
          pos_ = save;
        }
      }
      if (w == "async") {
        Location loc = t.loc;
        advance();
        if (at_kw("def")) return out.push_back(parse_funcdef({}, true));
        if (at_kw("for")) return out.push_back(parse_for(true));
        if (at_kw("with")) return out.push_back(parse_with(true));
        throw ParseError("expected 'def', 'for' or 'with' after 'async'", loc);
      }
    }
    if (t.kind == TokenKind::Indent) fail("unexpected indent");
    parse_simple_statements(out);
  }

  void parse_simple_statements(Suite& out) {
    for (;;) {
      out.push_back(parse_small_statement());
      if (!accept_op(";")) break;
      if (peek().kind == TokenKind::Newline) break;
    }
    expect(TokenKind::Newline);
  }

  Suite parse_block() {
    expect_op(":");
    Suite body;
    if (peek().kind == TokenKind::Newline) {
      advance();
      if (peek().kind != TokenKind::Indent) fail("expected an indented block");
      advance();
      while (peek().kind != TokenKind::Dedent && peek().kind != TokenKind::EndMarker) {
        parse_statement(body);
      }
      expect(TokenKind::Dedent);
    } else {
      parse_simple_statements(body);
    }
    return body;
  }

  StmtPtr parse_small_statement() {
    const Token& t = peek();
    Location loc = t.loc;
    if (t.kind == TokenKind::Name) {
      const std::string w = t.text;
      if (w == "pass" || w == "break" || w == "continue") {
        advance();
        return make_stmt(w == "pass" ? StmtKind::Pass : w == "break" ? StmtKind::Break : StmtKind::Continue, loc);
      }
      if (w == "return") {
        advance();
        auto s = make_stmt(StmtKind::Return, loc);
        if (starts_expression()) s->value = parse_testlist_star_expr();
        return s;
      }
      if (w == "raise") {
        advance();
        auto s = make_stmt(StmtKind::Raise, loc);
        if (starts_expression()) {
          s->value = parse_test();
          if (accept_kw("from")) s->cause = parse_test();
        }
        return s;
      }
      if (w == "global" || w == "nonlocal") {
        advance();
        auto s = make_stmt(w == "global" ? StmtKind::Global : StmtKind::Nonlocal, loc);
        s->names.push_back(expect_identifier());
        while (accept_op(",")) s->names.push_back(expect_identifier());
        return s;
      }
      if (w == "del") {
        advance();
        auto s = make_stmt(StmtKind::Delete, loc);
        auto target = parse_exprlist();
        check_target(*target, TargetContext::Delete);
        s->targets.push_back(std::move(target));
        return s;
      }
      if (w == "assert") {
        advance();
        auto s = make_stmt(StmtKind::Assert, loc);
        s->test = parse_test();
        if (accept_op(",")) s->value = parse_test();
        return s;
      }
      if (w == "import") return parse_import();
      if (w == "from") return parse_from_import();
    }
    return parse_expression_statement();
  }

  std::string parse_dotted_name() {
    std::string name = expect_identifier();
    while (accept_op(".")) name += "." + expect_identifier();
    return name;
  }

  StmtPtr parse_import() {
    auto s = make_stmt(StmtKind::Import, peek().loc);
    expect_kw("import");
    do {
      ImportAlias alias;
      alias.name = parse_dotted_name();
      if (accept_kw("as")) alias.asname = expect_identifier();
      s->aliases.push_back(std::move(alias));
    } while (accept_op(","));
    return s;
  }

  StmtPtr parse_from_import() {
    auto s = make_stmt(StmtKind::ImportFrom, peek().loc);
    expect_kw("from");
    for (;;) {
      if (accept_op(".")) {
        s->level += 1;
      } else if (accept_op("...")) {
        s->level += 3;
      } else {
        break;
      }
    }
    if (!at_kw("import")) s->module = parse_dotted_name();
    if (s->level == 0 && s->module.empty()) fail("expected module name");
    expect_kw("import");
    if (accept_op("*")) {
      s->aliases.push_back({"*", ""});
      return s;
    }
    bool parens = accept_op("(");
    for (;;) {
      ImportAlias alias;
      alias.name = expect_identifier();
      if (accept_kw("as")) alias.asname = expect_identifier();
      s->aliases.push_back(std::move(alias));
      if (!accept_op(",")) break;
      if (parens && at_op(")")) break;
      if (!parens && peek().kind != TokenKind::Name) fail("trailing comma not allowed without surrounding parentheses");
    }
    if (parens) expect_op(")");
    return s;
  }

  static bool is_augassign(const Token& t) {
    static const std::set<std::string, std::less<>> ops = {"+=", "-=", "*=", "/=", "//=", "%=", "@=",
                                                           "&=", "|=", "^=", ">>=", "<<=", "**="};
    return t.kind == TokenKind::Op && ops.count(t.text) > 0;
  }

  ExprPtr parse_rhs() {
    if (at_kw("yield")) return parse_yield();
    return parse_testlist_star_expr();
  }

  StmtPtr parse_expression_statement() {
    Location loc = peek().loc;
    ExprPtr first = at_kw("yield") ? parse_yield() : parse_testlist_star_expr();
    if (at_op(":")) {
      advance();
      check_target(*first, TargetContext::Annotated);
      auto s = make_stmt(StmtKind::AnnAssign, loc);
      s->annotation = parse_test();
      if (accept_op("=")) s->value = parse_rhs();
      s->targets.push_back(std::move(first));
      return s;
    }
    if (is_augassign(peek())) {
      check_target(*first, TargetContext::AugAssign);
      auto s = make_stmt(StmtKind::AugAssign, loc);
      s->op = advance().text;
      s->op.pop_back();
      s->value = at_kw("yield") ? parse_yield() : parse_testlist();
      s->targets.push_back(std::move(first));
      return s;
    }
    if (at_op("=")) {
      auto s = make_stmt(StmtKind::Assign, loc);
      ExprPtr current = std::move(first);
      while (accept_op("=")) {
        check_target(*current, TargetContext::Assign);
        s->targets.push_back(std::move(current));
        current = parse_rhs();
      }
      s->value = std::move(current);
      return s;
    }
    auto s = make_stmt(StmtKind::Expression, loc);
    s->value = std::move(first);
    return s;
  }

  StmtPtr parse_decorated() {
    std::vector<ExprPtr> decorators;
    while (accept_op("@")) {
      decorators.push_back(parse_named_test());
      expect(TokenKind::Newline);
    }
    if (at_kw("def")) return parse_funcdef(std::move(decorators), false);
    if (at_kw("class")) return parse_classdef(std::move(decorators));
    if (at_kw("async") && at_kw("def", 1)) {
      advance();
      return parse_funcdef(std::move(decorators), true);
    }
    fail("expected function or class definition after decorator");
  }

  StmtPtr parse_funcdef(std::vector<ExprPtr> decorators, bool is_async) {
    auto s = make_stmt(StmtKind::FunctionDef, peek().loc);
    s->is_async = is_async;
    expect_kw("def");
    s->name = expect_identifier();
    s->decorators = std::move(decorators);
    expect_op("(");
    s->params = parse_parameters(")", true);
    expect_op(")");
    if (accept_op("->")) s->returns = parse_test();
    s->body = parse_block();
    return s;
  }

  StmtPtr parse_classdef(std::vector<ExprPtr> decorators) {
    auto s = make_stmt(StmtKind::ClassDef, peek().loc);
    expect_kw("class");
    s->name = expect_identifier();
    s->decorators = std::move(decorators);
    if (accept_op("(")) {
      auto call = make(ExprKind::Call, s->loc);
      call->operands.push_back(nullptr);
      parse_call_arguments(*call);
      for (std::size_t i = 1; i < call->operands.size(); ++i) s->bases.push_back(std::move(call->operands[i]));
      s->class_keywords = std::move(call->keywords);
    }
    s->body = parse_block();
    return s;
  }

  StmtPtr parse_if() {
    auto s = make_stmt(StmtKind::If, peek().loc);
    advance();  // 'if' or 'elif'
    s->test = parse_named_test();
    s->body = parse_block();
    if (at_kw("elif")) {
      s->orelse.push_back(parse_if());
    } else if (accept_kw("else")) {
      s->orelse = parse_block();
    }
    return s;
  }

  StmtPtr parse_while() {
    auto s = make_stmt(StmtKind::While, peek().loc);
    expect_kw("while");
    s->test = parse_named_test();
    s->body = parse_block();
    if (accept_kw("else")) s->orelse = parse_block();
    return s;
  }

  StmtPtr parse_for(bool is_async) {
    auto s = make_stmt(StmtKind::For, peek().loc);
    s->is_async = is_async;
    expect_kw("for");
    auto target = parse_exprlist();
    check_target(*target, TargetContext::For);
    s->targets.push_back(std::move(target));
    expect_kw("in");
    s->value = parse_testlist_star_expr();
    s->body = parse_block();
    if (accept_kw("else")) s->orelse = parse_block();
    return s;
  }

  StmtPtr parse_try() {
    auto s = make_stmt(StmtKind::Try, peek().loc);
    expect_kw("try");
    s->body = parse_block();
    while (at_kw("except")) {
      ExceptHandler handler;
      handler.loc = advance().loc;
      accept_op("*");
      if (!at_op(":")) {
        handler.type = parse_test();
        if (accept_op(",")) fail("multiple exception types must be parenthesized");
        if (accept_kw("as")) handler.name = expect_identifier();
      }
      handler.body = parse_block();
      s->handlers.push_back(std::move(handler));
    }
    if (at_kw("else")) {
      if (s->handlers.empty()) fail("'else' requires an 'except' clause");
      advance();
      s->orelse = parse_block();
    }
    if (accept_kw("finally")) s->finalbody = parse_block();
    if (s->handlers.empty() && s->finalbody.empty()) fail("expected 'except' or 'finally' block");
    return s;
  }

  StmtPtr parse_match() {
    auto s = make_stmt(StmtKind::Match, peek().loc);
    match_header_parsed_ = false;
    advance();
    s->value = parse_testlist_star_expr();
    expect_op(":");
    expect(TokenKind::Newline);
    if (peek().kind != TokenKind::Indent || !at_kw("case", 1)) fail("expected 'case' block");
    match_header_parsed_ = true;
    advance();
    while (accept_kw("case")) {
      MatchCase c;
      c.pattern = parse_patterns();
      if (accept_kw("if")) c.guard = parse_named_test();
      c.body = parse_block();
      s->cases.push_back(std::move(c));
    }
    expect(TokenKind::Dedent);
    match_header_parsed_ = false;
    return s;
  }

  ExprPtr parse_patterns() {
    Location loc = peek().loc;
    ExprPtr first = parse_maybe_star_pattern();
    if (!at_op(",")) {
      if (first->kind == ExprKind::Starred) fail("star pattern outside sequence");
      return first;
    }
    auto seq = make(ExprKind::Tuple, loc);
    seq->operands.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_op(":") || at_kw("if")) break;
      seq->operands.push_back(parse_maybe_star_pattern());
    }
    return seq;
  }

  ExprPtr parse_maybe_star_pattern() {
    if (at_op("*")) {
      auto e = make(ExprKind::Starred, advance().loc);
      auto name = make(ExprKind::Name, peek().loc);
      name->text = expect_identifier();
      e->operands.push_back(std::move(name));
      return e;
    }
    return parse_pattern();
  }

  ExprPtr parse_pattern() {
    Location loc = peek().loc;
    ExprPtr alt = parse_closed_pattern();
    while (at_op("|")) {
      auto e = make(ExprKind::BinOp, loc);
      e->text = advance().text;
      e->operands.push_back(std::move(alt));
      e->operands.push_back(parse_closed_pattern());
      alt = std::move(e);
    }
    if (accept_kw("as")) {
      auto e = make(ExprKind::NamedExpr, loc);
      auto target = make(ExprKind::Name, peek().loc);
      target->text = expect_identifier();
      e->operands.push_back(std::move(target));
      e->operands.push_back(std::move(alt));
      return e;
    }
    return alt;
  }

  ExprPtr parse_literal_pattern() {
    // Signed numbers and complex literals ("-1", "1 + 2j").
    Location loc = peek().loc;
    ExprPtr value;
    if (at_op("-")) {
      value = make(ExprKind::UnaryOp, advance().loc);
      value->text = "-";
      if (peek().kind != TokenKind::Number) fail("expected number in pattern");
      value->operands.push_back(parse_atom());
    } else {
      value = parse_atom();
    }
    if (value->kind != ExprKind::String && (at_op("+") || at_op("-"))) {
      auto e = make(ExprKind::BinOp, loc);
      e->text = advance().text;
      if (peek().kind != TokenKind::Number) fail("expected imaginary number in pattern");
      e->operands.push_back(std::move(value));
      e->operands.push_back(parse_atom());
      return e;
    }
    return value;
  }

  ExprPtr parse_closed_pattern() {
    const Token& t = peek();
    Location loc = t.loc;
    if (t.kind == TokenKind::Number || t.kind == TokenKind::String || at_op("-")) return parse_literal_pattern();
    if (at_kw("None") || at_kw("True") || at_kw("False")) return parse_atom();
    if (accept_op("(")) {
      if (accept_op(")")) return make(ExprKind::Tuple, loc);
      ExprPtr first = parse_maybe_star_pattern();
      if (accept_op(")")) {
        if (first->kind == ExprKind::Starred) fail("star pattern outside sequence");
        return first;
      }
      auto seq = make(ExprKind::Tuple, loc);
      seq->operands.push_back(std::move(first));
      while (accept_op(",")) {
        if (at_op(")")) break;
        seq->operands.push_back(parse_maybe_star_pattern());
      }
      expect_op(")");
      return seq;
    }
    if (accept_op("[")) {
      auto seq = make(ExprKind::List, loc);
      while (!at_op("]")) {
        seq->operands.push_back(parse_maybe_star_pattern());
        if (!accept_op(",")) break;
      }
      expect_op("]");
      return seq;
    }
    if (accept_op("{")) {
      auto mapping = make(ExprKind::Dict, loc);
      while (!at_op("}")) {
        if (accept_op("**")) {
          auto rest = make(ExprKind::Name, peek().loc);
          rest->text = expect_identifier();
          mapping->operands.push_back(nullptr);
          mapping->operands.push_back(std::move(rest));
        } else {
          const Token& k = peek();
          ExprPtr key;
          if (k.kind == TokenKind::Name && !is_keyword(k.text)) {
            key = parse_value_pattern_name();
            if (key->kind == ExprKind::Name) fail("mapping pattern keys must be literals or dotted names");
          } else {
            key = parse_literal_pattern();
          }
          expect_op(":");
          mapping->operands.push_back(std::move(key));
          mapping->operands.push_back(parse_pattern());
        }
        if (!accept_op(",")) break;
      }
      expect_op("}");
      return mapping;
    }
    if (t.kind == TokenKind::Name && !is_keyword(t.text)) {
      ExprPtr name = parse_value_pattern_name();
      if (accept_op("(")) {
        auto cls = make(ExprKind::Call, loc);
        cls->operands.push_back(std::move(name));
        bool saw_keyword = false;
        while (!at_op(")")) {
          if (peek().kind == TokenKind::Name && at_op("=", 1)) {
            std::string kw = expect_identifier();
            advance();
            cls->keywords.push_back({std::move(kw), parse_pattern()});
            saw_keyword = true;
          } else {
            if (saw_keyword) fail("positional patterns follow keyword patterns");
            cls->operands.push_back(parse_pattern());
          }
          if (!accept_op(",")) break;
        }
        expect_op(")");
        return cls;
      }
      return name;
    }
    fail("invalid pattern");
  }

  ExprPtr parse_value_pattern_name() {
    auto e = make(ExprKind::Name, peek().loc);
    e->text = expect_identifier();
    while (at_op(".")) {
      advance();
      auto attr = make(ExprKind::Attribute, e->loc);
      attr->operands.push_back(std::move(e));
      attr->text = expect_identifier();
      e = std::move(attr);
    }
    return e;
  }

  WithItem parse_with_item() {
    WithItem item;
    item.context = parse_test();
    if (accept_kw("as")) {
      item.target = parse_star_target();
      check_target(*item.target, TargetContext::Assign);
    }
    return item;
  }

  StmtPtr parse_with(bool is_async) {
    auto s = make_stmt(StmtKind::With, peek().loc);
    s->is_async = is_async;
    expect_kw("with");
    if (at_op("(")) {
      // Parenthesized item list; fall back to an ordinary expression on failure.
      std::size_t save = pos_;
      try {
        advance();
        std::vector<WithItem> items;
        do {
          if (at_op(")")) break;
          items.push_back(parse_with_item());
        } while (accept_op(","));
        expect_op(")");
        if (!at_op(":")) throw ParseError("not a parenthesized with-item list", peek().loc);
        s->items = std::move(items);
      } catch (const ParseError&) {
        pos_ = save;
        s->items.clear();
      }
    }
    if (s->items.empty()) {
      do {
        s->items.push_back(parse_with_item());
      } while (accept_op(","));
    }
    s->body = parse_block();
    return s;
  }

  std::vector<Parameter> parse_parameters(std::string_view closer, bool annotations) {
    std::vector<Parameter> params;
    std::set<std::string> seen;
    bool saw_default = false;
    bool saw_star = false;
    bool saw_slash = false;
    auto add = [&](Parameter p) {
      if (!seen.insert(p.name).second) fail("duplicate argument '" + p.name + "' in function definition");
      params.push_back(std::move(p));
    };
    while (!at_op(closer)) {
      if (accept_op("/")) {
        if (saw_slash || saw_star || params.empty()) fail("invalid '/' in parameter list");
        saw_slash = true;
      } else if (accept_op("**")) {
        Parameter p;
        p.kind = Parameter::Kind::VarKeywords;
        p.name = expect_identifier();
        if (annotations && accept_op(":")) p.annotation = parse_test();
        add(std::move(p));
        accept_op(",");
        if (!at_op(closer)) fail("arguments cannot follow var-keyword argument");
        break;
      } else if (accept_op("*")) {
        if (saw_star) fail("* argument may appear only once");
        saw_star = true;
        if (peek().kind == TokenKind::Name && !is_keyword(peek().text)) {
          Parameter p;
          p.kind = Parameter::Kind::VarArgs;
          p.name = expect_identifier();
          if (annotations && accept_op(":")) p.annotation = parse_test();
          add(std::move(p));
        } else if (at_op(closer)) {
          fail("named arguments must follow bare *");
        }
      } else {
        Parameter p;
        p.kind = saw_star ? Parameter::Kind::KeywordOnly : Parameter::Kind::Positional;
        p.name = expect_identifier();
        if (annotations && accept_op(":")) p.annotation = parse_test();
        if (accept_op("=")) {
          p.default_value = parse_test();
          if (!saw_star) saw_default = true;
        } else if (saw_default && !saw_star) {
          fail("non-default argument follows default argument");
        }
        add(std::move(p));
      }
      if (!accept_op(",")) break;
    }
    return params;
  }

  // ---- expressions ----

  ExprPtr parse_yield() {
    Location loc = peek().loc;
    expect_kw("yield");
    if (accept_kw("from")) {
      auto e = make(ExprKind::YieldFrom, loc);
      e->operands.push_back(parse_test());
      return e;
    }
    auto e = make(ExprKind::Yield, loc);
    if (starts_expression() && !at_kw("yield")) e->operands.push_back(parse_testlist_star_expr());
    return e;
  }

  ExprPtr parse_star_or_named() {
    if (at_op("*")) {
      auto e = make(ExprKind::Starred, advance().loc);
      e->operands.push_back(parse_bitor());
      return e;
    }
    return parse_named_test();
  }

  ExprPtr parse_star_target() {
    if (at_op("*")) {
      auto e = make(ExprKind::Starred, advance().loc);
      e->operands.push_back(parse_bitor());
      return e;
    }
    return parse_bitor();
  }

  // Comma-separated sequence; a trailing comma or more than one item makes a tuple.
  template <typename ItemFn>
  ExprPtr parse_sequence(ItemFn item, bool allow_trailing_stop = true) {
    Location loc = peek().loc;
    ExprPtr first = item();
    if (!at_op(",")) return first;
    auto tuple = make(ExprKind::Tuple, loc);
    tuple->operands.push_back(std::move(first));
    while (accept_op(",")) {
      if (allow_trailing_stop && !starts_expression()) break;
      tuple->operands.push_back(item());
    }
    return tuple;
  }

  // Statement-level expression lists: unparenthesized ':=' is not allowed here.
  ExprPtr parse_testlist_star_expr() {
    return parse_sequence([this] {
      if (at_op("*")) return parse_star_target();
      return parse_test();
    });
  }
  ExprPtr parse_testlist() {
    return parse_sequence([this] { return parse_test(); });
  }
  ExprPtr parse_exprlist() {
    return parse_sequence([this] { return parse_star_target(); });
  }

  ExprPtr parse_named_test() {
    Location loc = peek().loc;
    ExprPtr lhs = parse_test();
    if (at_op(":=")) {
      if (lhs->kind != ExprKind::Name) fail("cannot use assignment expressions with this target");
      advance();
      auto e = make(ExprKind::NamedExpr, loc);
      e->operands.push_back(std::move(lhs));
      e->operands.push_back(parse_test());
      return e;
    }
    return lhs;
  }

  ExprPtr parse_test() {
    if (at_kw("lambda")) return parse_lambda(false);
    Location loc = peek().loc;
    ExprPtr body = parse_or_test();
    if (at_kw("if")) {
      advance();
      auto e = make(ExprKind::IfExp, loc);
      ExprPtr test = parse_or_test();
      expect_kw("else");
      e->operands.push_back(std::move(body));
      e->operands.push_back(std::move(test));
      e->operands.push_back(parse_test());
      return e;
    }
    return body;
  }

  ExprPtr parse_test_nocond() {
    if (at_kw("lambda")) return parse_lambda(true);
    return parse_or_test();
  }

  ExprPtr parse_lambda(bool nocond) {
    auto e = make(ExprKind::Lambda, advance().loc);
    e->params = parse_parameters(":", false);
    expect_op(":");
    e->operands.push_back(nocond ? parse_test_nocond() : parse_test());
    return e;
  }

  ExprPtr parse_bool(std::string_view op, ExprPtr (Parser::*next)()) {
    Location loc = peek().loc;
    ExprPtr first = (this->*next)();
    if (!at_kw(op)) return first;
    auto e = make(ExprKind::BoolOp, loc);
    e->text = std::string(op);
    e->operands.push_back(std::move(first));
    while (accept_kw(op)) e->operands.push_back((this->*next)());
    return e;
  }

  ExprPtr parse_or_test() { return parse_bool("or", &Parser::parse_and_test); }
  ExprPtr parse_and_test() { return parse_bool("and", &Parser::parse_not_test); }

  ExprPtr parse_not_test() {
    if (at_kw("not")) {
      auto e = make(ExprKind::UnaryOp, advance().loc);
      e->text = "not";
      e->operands.push_back(parse_not_test());
      return e;
    }
    return parse_comparison();
  }

  std::string accept_comparison_op() {
    static const std::set<std::string, std::less<>> ops = {"<", ">", "==", ">=", "<=", "!="};
    const Token& t = peek();
    if (t.kind == TokenKind::Op && ops.count(t.text)) return advance().text;
    if (at_kw("in")) {
      advance();
      return "in";
    }
    if (at_kw("not") && at_kw("in", 1)) {
      advance();
      advance();
      return "not in";
    }
    if (at_kw("is")) {
      advance();
      if (accept_kw("not")) return "is not";
      return "is";
    }
    return {};
  }

  ExprPtr parse_comparison() {
    Location loc = peek().loc;
    ExprPtr first = parse_bitor();
    std::string op = accept_comparison_op();
    if (op.empty()) return first;
    auto e = make(ExprKind::Compare, loc);
    e->operands.push_back(std::move(first));
    while (!op.empty()) {
      e->compare_ops.push_back(op);
      e->operands.push_back(parse_bitor());
      op = accept_comparison_op();
    }
    return e;
  }

  ExprPtr parse_binary(std::initializer_list<std::string_view> ops, ExprPtr (Parser::*next)()) {
    Location loc = peek().loc;
    ExprPtr lhs = (this->*next)();
    for (;;) {
      const Token& t = peek();
      if (t.kind != TokenKind::Op || std::find(ops.begin(), ops.end(), t.text) == ops.end()) return lhs;
      auto e = make(ExprKind::BinOp, loc);
      e->text = advance().text;
      e->operands.push_back(std::move(lhs));
      e->operands.push_back((this->*next)());
      lhs = std::move(e);
    }
  }

  ExprPtr parse_bitor() { return parse_binary({"|"}, &Parser::parse_xor); }
  ExprPtr parse_xor() { return parse_binary({"^"}, &Parser::parse_bitand); }
  ExprPtr parse_bitand() { return parse_binary({"&"}, &Parser::parse_shift); }
  ExprPtr parse_shift() { return parse_binary({"<<", ">>"}, &Parser::parse_arith); }
  ExprPtr parse_arith() { return parse_binary({"+", "-"}, &Parser::parse_term); }
  ExprPtr parse_term() { return parse_binary({"*", "/", "%", "//", "@"}, &Parser::parse_factor); }

  ExprPtr parse_factor() {
    if (at_op("-") || at_op("+") || at_op("~")) {
      auto e = make(ExprKind::UnaryOp, peek().loc);
      e->text = advance().text;
      e->operands.push_back(parse_factor());
      return e;
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    Location loc = peek().loc;
    ExprPtr base;
    if (at_kw("await")) {
      advance();
      base = make(ExprKind::Await, loc);
      base->operands.push_back(parse_primary());
    } else {
      base = parse_primary();
    }
    if (at_op("**")) {
      advance();
      auto e = make(ExprKind::BinOp, loc);
      e->text = "**";
      e->operands.push_back(std::move(base));
      e->operands.push_back(parse_factor());
      return e;
    }
    return base;
  }

  ExprPtr parse_primary() {
    ExprPtr e = parse_atom();
    for (;;) {
      Location loc = peek().loc;
      if (accept_op("(")) {
        auto call = make(ExprKind::Call, e->loc);
        call->operands.push_back(std::move(e));
        parse_call_arguments(*call);
        e = std::move(call);
      } else if (accept_op("[")) {
        auto sub = make(ExprKind::Subscript, e->loc);
        sub->operands.push_back(std::move(e));
        sub->operands.push_back(parse_subscript_list(loc));
        expect_op("]");
        e = std::move(sub);
      } else if (accept_op(".")) {
        auto attr = make(ExprKind::Attribute, e->loc);
        attr->operands.push_back(std::move(e));
        attr->text = expect_identifier();
        e = std::move(attr);
      } else {
        return e;
      }
    }
  }

  // Called after '('; consumes the closing ')'.
  void parse_call_arguments(Expr& call) {
    bool saw_keyword = false;
    bool saw_double_star = false;
    while (!at_op(")")) {
      Location loc = peek().loc;
      if (accept_op("**")) {
        call.keywords.push_back({"", parse_test()});
        saw_double_star = true;
      } else if (accept_op("*")) {
        if (saw_double_star) fail("iterable argument unpacking follows keyword argument unpacking");
        auto star = make(ExprKind::Starred, loc);
        star->operands.push_back(parse_test());
        call.operands.push_back(std::move(star));
      } else if (peek().kind == TokenKind::Name && at_op("=", 1)) {
        std::string name = expect_identifier();
        advance();
        call.keywords.push_back({std::move(name), parse_test()});
        saw_keyword = true;
      } else {
        ExprPtr arg = parse_named_test();
        if (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
          auto gen = make(ExprKind::GeneratorExp, loc);
          gen->operands.push_back(std::move(arg));
          parse_comprehension_clauses(*gen);
          arg = std::move(gen);
          if (call.operands.size() > 1 || !call.keywords.empty() || !at_op(")")) {
            fail("generator expression must be parenthesized");
          }
        }
        if (saw_keyword || saw_double_star) {
          throw ParseError(saw_double_star ? "positional argument follows keyword argument unpacking"
                                           : "positional argument follows keyword argument",
                           loc);
        }
        call.operands.push_back(std::move(arg));
      }
      if (!accept_op(",")) break;
    }
    expect_op(")");
  }

  ExprPtr parse_subscript_item() {
    Location loc = peek().loc;
    if (at_op("*")) return parse_star_or_named();
    ExprPtr lower;
    if (!at_op(":")) {
      lower = parse_named_test();
      if (!at_op(":")) return lower;
    }
    auto slice = make(ExprKind::Slice, loc);
    expect_op(":");
    ExprPtr upper;
    ExprPtr step;
    if (!at_op(":") && !at_op("]") && !at_op(",")) upper = parse_test();
    if (accept_op(":")) {
      if (!at_op("]") && !at_op(",")) step = parse_test();
    }
    slice->operands.push_back(std::move(lower));
    slice->operands.push_back(std::move(upper));
    slice->operands.push_back(std::move(step));
    return slice;
  }

  ExprPtr parse_subscript_list(Location loc) {
    if (at_op("]")) fail("empty subscript");
    ExprPtr first = parse_subscript_item();
    if (!at_op(",")) return first;
    auto tuple = make(ExprKind::Tuple, loc);
    tuple->operands.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_op("]")) break;
      tuple->operands.push_back(parse_subscript_item());
    }
    return tuple;
  }

  void parse_comprehension_clauses(Expr& comp) {
    while (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
      Comprehension gen;
      if (accept_kw("async")) gen.is_async = true;
      expect_kw("for");
      gen.target = parse_exprlist();
      check_target(*gen.target, TargetContext::For);
      expect_kw("in");
      gen.iter = parse_or_test();
      while (at_kw("if")) {
        advance();
        gen.conditions.push_back(parse_test_nocond());
      }
      comp.generators.push_back(std::move(gen));
    }
  }

  bool at_comprehension() const { return at_kw("for") || (at_kw("async") && at_kw("for", 1)); }

  ExprPtr parse_atom() {
    const Token& t = peek();
    Location loc = t.loc;
    switch (t.kind) {
      case TokenKind::Number: {
        auto e = make(ExprKind::Number, loc);
        e->text = advance().text;
        return e;
      }
      case TokenKind::String: {
        auto e = make(ExprKind::String, loc);
        while (peek().kind == TokenKind::String) e->text += advance().text;
        return e;
      }
      case TokenKind::Name: {
        if (t.text == "None" || t.text == "True" || t.text == "False") {
          auto e = make(ExprKind::Constant, loc);
          e->text = advance().text;
          return e;
        }
        if (is_keyword(t.text)) fail("invalid syntax");
        auto e = make(ExprKind::Name, loc);
        e->text = advance().text;
        return e;
      }
      case TokenKind::Op:
        break;
      default:
        fail("invalid syntax");
    }
    if (accept_op("...")) {
      auto e = make(ExprKind::Constant, loc);
      e->text = "...";
      return e;
    }
    if (accept_op("(")) {
      if (accept_op(")")) return make(ExprKind::Tuple, loc);
      if (at_kw("yield")) {
        ExprPtr y = parse_yield();
        expect_op(")");
        return y;
      }
      ExprPtr first = parse_star_or_named();
      if (at_comprehension()) {
        auto gen = make(ExprKind::GeneratorExp, loc);
        gen->operands.push_back(std::move(first));
        parse_comprehension_clauses(*gen);
        expect_op(")");
        return gen;
      }
      if (accept_op(")")) {
        if (first->kind == ExprKind::Starred) throw ParseError("cannot use starred expression here", first->loc);
        return first;
      }
      auto tuple = make(ExprKind::Tuple, loc);
      tuple->operands.push_back(std::move(first));
      while (accept_op(",")) {
        if (at_op(")")) break;
        tuple->operands.push_back(parse_star_or_named());
      }
      expect_op(")");
      return tuple;
    }
    if (accept_op("[")) {
      auto list = make(ExprKind::List, loc);
      if (accept_op("]")) return list;
      ExprPtr first = parse_star_or_named();
      if (at_comprehension()) {
        auto comp = make(ExprKind::ListComp, loc);
        comp->operands.push_back(std::move(first));
        parse_comprehension_clauses(*comp);
        expect_op("]");
        return comp;
      }
      list->operands.push_back(std::move(first));
      while (accept_op(",")) {
        if (at_op("]")) break;
        list->operands.push_back(parse_star_or_named());
      }
      expect_op("]");
      return list;
    }
    if (accept_op("{")) return parse_brace_display(loc);
    fail("invalid syntax");
  }

  ExprPtr parse_brace_display(Location loc) {
    if (accept_op("}")) return make(ExprKind::Dict, loc);
    auto parse_dict_entry = [this](Expr& dict) {
      if (accept_op("**")) {
        dict.operands.push_back(nullptr);
        dict.operands.push_back(parse_bitor());
        return;
      }
      dict.operands.push_back(parse_test());
      expect_op(":");
      dict.operands.push_back(parse_test());
    };
    if (at_op("**")) {
      auto dict = make(ExprKind::Dict, loc);
      parse_dict_entry(*dict);
      while (accept_op(",")) {
        if (at_op("}")) break;
        parse_dict_entry(*dict);
      }
      expect_op("}");
      return dict;
    }
    ExprPtr first = parse_star_or_named();
    if (accept_op(":")) {
      ExprPtr value = parse_test();
      if (at_comprehension()) {
        auto comp = make(ExprKind::DictComp, loc);
        comp->operands.push_back(std::move(first));
        comp->operands.push_back(std::move(value));
        parse_comprehension_clauses(*comp);
        expect_op("}");
        return comp;
      }
      auto dict = make(ExprKind::Dict, loc);
      dict->operands.push_back(std::move(first));
      dict->operands.push_back(std::move(value));
      while (accept_op(",")) {
        if (at_op("}")) break;
        parse_dict_entry(*dict);
      }
      expect_op("}");
      return dict;
    }
    if (at_comprehension()) {
      auto comp = make(ExprKind::SetComp, loc);
      comp->operands.push_back(std::move(first));
      parse_comprehension_clauses(*comp);
      expect_op("}");
      return comp;
    }
    auto set = make(ExprKind::Set, loc);
    set->operands.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_op("}")) break;
      set->operands.push_back(parse_star_or_named());
    }
    expect_op("}");
    return set;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  bool match_header_parsed_ = false;
};

}  // namespace

Module parse(std::string_view source) { return Parser(tokenize(source)).parse_module(); }

bool parses(std::string_view source) {
  try {
    parse(source);
    return true;
  } catch (const ParseError&) {
    return false;
  }
}

}  // namespace forge::python
