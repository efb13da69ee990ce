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

#include <map>
#include <set>
#include <string>
#include <vector>

#include "forge/python/ast.hpp"

namespace forge::lint {

struct FunctionInfo {
  const python::Stmt* def = nullptr;
  std::string owner;  // enclosing class, empty for free functions
};

struct ClassInfo {
  const python::Stmt* def = nullptr;
  std::vector<std::string> bases;  // resolved paths
  std::map<std::string, const python::Stmt*> methods;
  // Attributes bound through `self.<name> = <expr>` in any method.
  std::map<std::string, std::vector<const python::Expr*>> self_attrs;
};

/// Name-resolution facts about one parsed module: the import table,
/// module-level aliases, free functions, classes, and Triton kernels.
class ModuleIndex {
 public:
  explicit ModuleIndex(const python::Module& module);

  /// Dotted path of a Name/Attribute chain with import aliases and
  /// module-level aliases substituted; empty for other expressions.
  std::string resolve(const python::Expr& expr) const;

  bool is_import_rooted(const std::string& path) const;

  const std::map<std::string, FunctionInfo>& functions() const { return functions_; }
  const std::map<std::string, ClassInfo>& classes() const { return classes_; }
  const std::vector<std::string>& class_order() const { return class_order_; }

  /// Kernel name -> definition, in source order via kernel_order().
  const std::map<std::string, const python::Stmt*>& kernels() const { return kernels_; }
  const std::vector<std::string>& kernel_order() const { return kernel_order_; }
  bool is_kernel(const std::string& name) const { return kernels_.count(name) > 0; }

  bool is_jit_decorator(const python::Expr& decorator) const;

 private:
  void collect_imports(const python::Suite& suite);
  void collect_kernels(const python::Suite& suite);

  std::map<std::string, std::string> imports_;
  std::map<std::string, std::string> aliases_;
  std::set<std::string> import_roots_;
  std::map<std::string, FunctionInfo> functions_;
  std::map<std::string, ClassInfo> classes_;
  std::vector<std::string> class_order_;
  std::map<std::string, const python::Stmt*> kernels_;
  std::vector<std::string> kernel_order_;
};

}  // namespace forge::lint
