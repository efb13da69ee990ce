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
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "forge/python/lexer.hpp"

namespace forge::python {

struct Expr;
struct Stmt;
using ExprPtr = std::unique_ptr<Expr>;
using StmtPtr = std::unique_ptr<Stmt>;
using Suite = std::vector<StmtPtr>;

enum class ExprKind : std::uint8_t {
  Name,       // text = identifier
  Number,     // text = literal
  String,     // text = concatenated literal tokens, verbatim
  Constant,   // text = None | True | False | ...
  Attribute,  // operands[0] = value, text = attribute
  Subscript,  // operands[0] = value, operands[1] = index
  Slice,      // operands = lower, upper, step (null when omitted)
  Call,       // operands[0] = callee, operands[1..] = positional args; keywords
  BinOp,      // text = operator, operands = lhs, rhs
  UnaryOp,    // text = operator (-, +, ~, not), operands[0]
  BoolOp,     // text = and | or, operands >= 2
  Compare,    // operands = left, comparators...; compare_ops parallel to comparators
  IfExp,      // operands = body, test, orelse
  Lambda,     // params; operands[0] = body
  Tuple,
  List,
  Set,
  Dict,       // operands alternate key, value; null key means **mapping
  ListComp,   // operands[0] = element; generators
  SetComp,
  DictComp,   // operands = key, value; generators
  GeneratorExp,
  Starred,    // operands[0]
  DoubleStarred,
  Yield,      // operands[0] optional
  YieldFrom,
  Await,
  NamedExpr,  // operands = target, value
};

struct Keyword {
  std::string name;  // empty for **kwargs
  ExprPtr value;
};

struct Comprehension {
  ExprPtr target;
  ExprPtr iter;
  std::vector<ExprPtr> conditions;
  bool is_async = false;
};

struct Parameter {
  enum class Kind : std::uint8_t { Positional, VarArgs, KeywordOnly, VarKeywords };
  std::string name;
  Kind kind = Kind::Positional;
  ExprPtr annotation;
  ExprPtr default_value;
};

struct Expr {
  ExprKind kind;
  Location loc;
  std::string text;
  std::vector<ExprPtr> operands;
  std::vector<Keyword> keywords;
  std::vector<std::string> compare_ops;
  std::vector<Comprehension> generators;
  std::vector<Parameter> params;

  Expr(ExprKind k, Location l) : kind(k), loc(l) {}

  const Expr* operand(std::size_t i) const { return i < operands.size() ? operands[i].get() : nullptr; }
};

enum class StmtKind : std::uint8_t {
  Expression,  // value
  Assign,      // targets (chained), value
  AugAssign,   // targets[0], op, value
  AnnAssign,   // targets[0], annotation, value optional
  Return,      // value optional
  Pass,
  Break,
  Continue,
  Delete,      // targets
  Raise,       // value optional, cause optional
  Global,      // names
  Nonlocal,
  Assert,      // test, value optional
  Import,      // aliases
  ImportFrom,  // module, level, aliases
  If,          // test, body, orelse
  While,       // test, body, orelse
  For,         // targets[0], value (iter), body, orelse
  Try,         // body, handlers, orelse, finalbody
  With,        // items, body
  FunctionDef, // name, params, decorators, returns, body
  ClassDef,    // name, bases, class_keywords, decorators, body
  Match,       // value (subject), cases
};

struct ImportAlias {
  std::string name;    // dotted module path or imported member; "*" for star imports
  std::string asname;  // empty when not aliased
};

struct ExceptHandler {
  ExprPtr type;
  std::string name;
  Suite body;
  Location loc;
};

// Patterns reuse the expression tree: captures are Name, value patterns are
// Attribute, class patterns are Call, sequences are List/Tuple, mappings are
// Dict, alternatives are BinOp "|", and "as" bindings are NamedExpr.
struct MatchCase {
  ExprPtr pattern;
  ExprPtr guard;
  Suite body;
};

struct WithItem {
  ExprPtr context;
  ExprPtr target;
};

struct Stmt {
  StmtKind kind;
  Location loc;
  bool is_async = false;

  std::vector<ExprPtr> targets;
  ExprPtr value;
  ExprPtr test;
  ExprPtr annotation;
  ExprPtr cause;
  std::string op;

  Suite body;
  Suite orelse;
  Suite finalbody;
  std::vector<ExceptHandler> handlers;
  std::vector<WithItem> items;
  std::vector<MatchCase> cases;

  std::string name;
  std::vector<std::string> names;
  std::string module;
  int level = 0;
  std::vector<ImportAlias> aliases;

  std::vector<Parameter> params;
  std::vector<ExprPtr> decorators;
  ExprPtr returns;
  std::vector<ExprPtr> bases;
  std::vector<Keyword> class_keywords;

  Stmt(StmtKind k, Location l) : kind(k), loc(l) {}
};

struct Module {
  Suite body;
};

/// Visits every direct child expression of `expr` (operands, keyword values,
/// comprehension parts, parameter defaults and annotations).
void for_each_child(const Expr& expr, const std::function<void(const Expr&)>& fn);

/// Visits every expression held directly by `stmt`, not descending into
/// nested statements.
void for_each_expr(const Stmt& stmt, const std::function<void(const Expr&)>& fn);

/// Visits the nested statement suites of `stmt` (body, orelse, handlers,
/// finalbody, match cases).
void for_each_suite(const Stmt& stmt, const std::function<void(const Suite&)>& fn);

/// Pre-order walk over `expr` and all of its descendants.
void walk(const Expr& expr, const std::function<void(const Expr&)>& fn);

/// Renders a dotted name for Name / Attribute chains ("torch.nn.functional");
/// empty for anything else.
std::string dotted_name(const Expr& expr);

}  // namespace forge::python
