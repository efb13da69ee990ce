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

#include "forge/python/ast.hpp"

namespace forge::python {

namespace {

void visit_params(const std::vector<Parameter>& params, const std::function<void(const Expr&)>& fn) {
  for (const auto& p : params) {
    if (p.annotation) fn(*p.annotation);
    if (p.default_value) fn(*p.default_value);
  }
}

}  // namespace

void for_each_child(const Expr& expr, const std::function<void(const Expr&)>& fn) {
  for (const auto& op : expr.operands) {
    if (op) fn(*op);
  }
  for (const auto& kw : expr.keywords) {
    if (kw.value) fn(*kw.value);
  }
  for (const auto& gen : expr.generators) {
    if (gen.target) fn(*gen.target);
    if (gen.iter) fn(*gen.iter);
    for (const auto& cond : gen.conditions) fn(*cond);
  }
  visit_params(expr.params, fn);
}

void for_each_expr(const Stmt& stmt, const std::function<void(const Expr&)>& fn) {
  for (const auto& d : stmt.decorators) fn(*d);
  for (const auto& t : stmt.targets) fn(*t);
  if (stmt.annotation) fn(*stmt.annotation);
  if (stmt.value) fn(*stmt.value);
  if (stmt.test) fn(*stmt.test);
  if (stmt.cause) fn(*stmt.cause);
  for (const auto& item : stmt.items) {
    if (item.context) fn(*item.context);
    if (item.target) fn(*item.target);
  }
  for (const auto& h : stmt.handlers) {
    if (h.type) fn(*h.type);
  }
  for (const auto& c : stmt.cases) {
    if (c.pattern) fn(*c.pattern);
    if (c.guard) fn(*c.guard);
  }
  visit_params(stmt.params, fn);
  if (stmt.returns) fn(*stmt.returns);
  for (const auto& b : stmt.bases) fn(*b);
  for (const auto& kw : stmt.class_keywords) {
    if (kw.value) fn(*kw.value);
  }
}

void for_each_suite(const Stmt& stmt, const std::function<void(const Suite&)>& fn) {
  fn(stmt.body);
  for (const auto& h : stmt.handlers) fn(h.body);
  fn(stmt.orelse);
  fn(stmt.finalbody);
  for (const auto& c : stmt.cases) fn(c.body);
}

void walk(const Expr& expr, const std::function<void(const Expr&)>& fn) {
  fn(expr);
  for_each_child(expr, [&](const Expr& child) { walk(child, fn); });
}

std::string dotted_name(const Expr& expr) {
  if (expr.kind == ExprKind::Name) return expr.text;
  if (expr.kind == ExprKind::Attribute && expr.operands[0]) {
    std::string base = dotted_name(*expr.operands[0]);
    if (base.empty()) return {};
    return base + "." + expr.text;
  }
  return {};
}

}  // namespace forge::python
