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

#include "module_index.hpp"

namespace forge::lint {

using python::Expr;
using python::ExprKind;
using python::Stmt;
using python::StmtKind;
using python::Suite;

ModuleIndex::ModuleIndex(const python::Module& module) {
  collect_imports(module.body);

  for (const auto& stmt : module.body) {
    if (stmt->kind == StmtKind::Assign && stmt->targets.size() == 1 &&
        stmt->targets[0]->kind == ExprKind::Name && stmt->value) {
      std::string path = resolve(*stmt->value);
      if (!path.empty() && is_import_rooted(path)) aliases_[stmt->targets[0]->text] = path;
    }
    if (stmt->kind == StmtKind::FunctionDef) {
      functions_[stmt->name] = FunctionInfo{stmt.get(), ""};
    }
    if (stmt->kind == StmtKind::ClassDef) {
      ClassInfo info;
      info.def = stmt.get();
      for (const auto& base : stmt->bases) info.bases.push_back(resolve(*base));
      for (const auto& member : stmt->body) {
        if (member->kind == StmtKind::FunctionDef) info.methods[member->name] = member.get();
      }
      // self.<attr> = value, anywhere inside any method.
      std::function<void(const Suite&)> scan = [&](const Suite& suite) {
        for (const auto& s : suite) {
          if ((s->kind == StmtKind::Assign || s->kind == StmtKind::AnnAssign) && s->value) {
            for (const auto& target : s->targets) {
              if (target->kind == ExprKind::Attribute && target->operand(0)->kind == ExprKind::Name &&
                  target->operand(0)->text == "self") {
                info.self_attrs[target->text].push_back(s->value.get());
              }
            }
          }
          python::for_each_suite(*s, scan);
        }
      };
      for (const auto& [name, method] : info.methods) scan(method->body);
      classes_[stmt->name] = std::move(info);
      class_order_.push_back(stmt->name);
    }
  }
  collect_kernels(module.body);

  // `kernel = triton.jit(fn)` at module level.
  for (const auto& stmt : module.body) {
    if (stmt->kind != StmtKind::Assign || stmt->targets.size() != 1 ||
        stmt->targets[0]->kind != ExprKind::Name || !stmt->value || stmt->value->kind != ExprKind::Call) {
      continue;
    }
    const Expr& call = *stmt->value;
    if (resolve(*call.operand(0)) != "triton.jit" || call.operands.size() < 2) continue;
    const Expr* fn = call.operand(1);
    if (fn->kind != ExprKind::Name) continue;
    auto it = functions_.find(fn->text);
    if (it == functions_.end()) continue;
    const std::string& name = stmt->targets[0]->text;
    if (kernels_.emplace(name, it->second.def).second) kernel_order_.push_back(name);
  }
}

void ModuleIndex::collect_imports(const Suite& suite) {
  for (const auto& stmt : suite) {
    if (stmt->kind == StmtKind::Import) {
      for (const auto& alias : stmt->aliases) {
        if (!alias.asname.empty()) {
          imports_[alias.asname] = alias.name;
          import_roots_.insert(alias.asname);
        } else {
          std::string root = alias.name.substr(0, alias.name.find('.'));
          imports_[root] = root;
          import_roots_.insert(root);
        }
      }
    } else if (stmt->kind == StmtKind::ImportFrom) {
      std::string base = std::string(static_cast<std::size_t>(stmt->level), '.') + stmt->module;
      for (const auto& alias : stmt->aliases) {
        if (alias.name == "*") continue;
        std::string bound = alias.asname.empty() ? alias.name : alias.asname;
        std::string sep = base.empty() || base.back() == '.' ? "" : ".";
        imports_[bound] = base + sep + alias.name;
        import_roots_.insert(bound);
      }
    }
    python::for_each_suite(*stmt, [this](const Suite& s) { collect_imports(s); });
  }
}

void ModuleIndex::collect_kernels(const Suite& suite) {
  for (const auto& stmt : suite) {
    if (stmt->kind == StmtKind::FunctionDef) {
      for (const auto& d : stmt->decorators) {
        if (is_jit_decorator(*d)) {
          if (kernels_.emplace(stmt->name, stmt.get()).second) kernel_order_.push_back(stmt->name);
          break;
        }
      }
    }
    python::for_each_suite(*stmt, [this](const Suite& s) { collect_kernels(s); });
  }
}

bool ModuleIndex::is_jit_decorator(const Expr& decorator) const {
  const Expr* target = &decorator;
  if (target->kind == ExprKind::Call) target = target->operand(0);
  return target && resolve(*target) == "triton.jit";
}

std::string ModuleIndex::resolve(const Expr& expr) const {
  if (expr.kind == ExprKind::Name) {
    if (auto it = imports_.find(expr.text); it != imports_.end()) return it->second;
    if (auto it = aliases_.find(expr.text); it != aliases_.end()) return it->second;
    return expr.text;
  }
  if (expr.kind == ExprKind::Attribute && expr.operand(0)) {
    std::string base = resolve(*expr.operand(0));
    if (base.empty()) return {};
    return base + "." + expr.text;
  }
  return {};
}

bool ModuleIndex::is_import_rooted(const std::string& path) const {
  for (const auto& [bound, target] : imports_) {
    if (path == target || path.compare(0, target.size() + 1, target + ".") == 0) return true;
  }
  return false;
}

}  // namespace forge::lint
