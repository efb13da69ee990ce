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

#include "forge/lint.hpp"

#include <algorithm>
#include <deque>
#include <exception>
#include <map>
#include <regex>
#include <set>

#include "catalog.hpp"
#include "forge/python/parser.hpp"
#include "kernel_dataflow.hpp"
#include "module_index.hpp"

namespace forge::lint {

namespace {

using python::Expr;
using python::ExprKind;
using python::Stmt;
using python::StmtKind;
using python::Suite;

/// Names bound inside a function: parameters plus every assignment target.
std::set<std::string> local_names(const Stmt& fn) {
  std::set<std::string> out;
  for (const auto& p : fn.params) out.insert(p.name);
  std::function<void(const Expr&)> bind = [&](const Expr& t) {
    if (t.kind == ExprKind::Name) {
      out.insert(t.text);
    } else if (t.kind == ExprKind::Tuple || t.kind == ExprKind::List || t.kind == ExprKind::Starred) {
      for (const auto& e : t.operands) bind(*e);
    }
  };
  std::function<void(const Suite&)> scan = [&](const Suite& suite) {
    for (const auto& s : suite) {
      for (const auto& t : s->targets) bind(*t);
      for (const auto& item : s->items) {
        if (item.target) bind(*item.target);
      }
      for (const auto& h : s->handlers) {
        if (!h.name.empty()) out.insert(h.name);
      }
      python::for_each_suite(*s, scan);
    }
  };
  scan(fn.body);
  return out;
}

class ReachabilityWalker {
 public:
  ReachabilityWalker(const ModuleIndex& index, LintReport& report) : index_(index), report_(report) {}

  void run(const std::string& entry_class) {
    if (const Stmt* fwd = find_method(entry_class, "forward")) enqueue(fwd, entry_class, true);
    drain();
    // Launch sites nothing reaches still appear in the report.
    for (const auto& [name, info] : index_.functions()) sweep_unvisited(*info.def, "");
    for (const auto& cls_name : index_.class_order()) {
      for (const auto& [mname, method] : index_.classes().at(cls_name).methods) sweep_unvisited(*method, cls_name);
    }
  }

 private:
  struct Item {
    const Stmt* fn;
    std::string owner;
    bool definite;
  };

  const Stmt* find_method(const std::string& cls, const std::string& method, int depth = 0) const {
    auto it = index_.classes().find(cls);
    if (it == index_.classes().end() || depth > 16) return nullptr;
    if (auto m = it->second.methods.find(method); m != it->second.methods.end()) return m->second;
    for (const auto& base : it->second.bases) {
      if (const Stmt* found = find_method(base, method, depth + 1)) return found;
    }
    return nullptr;
  }

  const ClassInfo* find_class(const std::string& name) const {
    auto it = index_.classes().find(name);
    return it == index_.classes().end() ? nullptr : &it->second;
  }

  void enqueue(const Stmt* fn, const std::string& owner, bool definite) {
    if (!fn || (index_.is_kernel(fn->name) && index_.kernels().at(fn->name) == fn)) return;
    if (definite) {
      if (!definite_.insert(fn).second) return;
    } else {
      if (definite_.count(fn) || !possible_.insert(fn).second) return;
    }
    queue_.push_back({fn, owner, definite});
  }

  void enqueue_class(const std::string& cls, bool definite) {
    enqueue(find_method(cls, "__init__"), cls, definite);
    enqueue(find_method(cls, "forward"), cls, definite);
  }

  void drain() {
    while (!queue_.empty()) {
      Item item = queue_.front();
      queue_.pop_front();
      scan_function(item);
    }
  }

  std::string qualified(const Item& item) const {
    return item.owner.empty() ? item.fn->name : item.owner + "." + item.fn->name;
  }

  void add_forbidden(const std::string& pattern, const std::string& call, const Item& item, int line) {
    if (!seen_forbidden_.emplace(line, pattern).second) return;
    report_.forbidden_calls.push_back({pattern, call, qualified(item), line});
  }

  void scan_function(const Item& item) {
    std::set<std::string> locals = local_names(*item.fn);
    std::function<void(const Suite&)> scan = [&](const Suite& suite) {
      for (const auto& s : suite) {
        if (s->kind == StmtKind::AugAssign && s->op == "@") add_forbidden("@", "@=", item, s->loc.line);
        python::for_each_expr(*s, [&](const Expr& root) {
          python::walk(root, [&](const Expr& e) { visit_expr(e, item, locals); });
        });
        python::for_each_suite(*s, scan);
      }
    };
    scan(item.fn->body);
  }

  void visit_expr(const Expr& e, const Item& item, const std::set<std::string>& locals) {
    if (e.kind == ExprKind::BinOp && e.text == "@") {
      add_forbidden("@", "@", item, e.loc.line);
      return;
    }
    if (e.kind != ExprKind::Call) return;
    const Expr& callee = *e.operand(0);
    // Functions handed to other callables may run on this path.
    for (std::size_t i = 1; i < e.operands.size(); ++i) {
      const Expr& arg = *e.operand(i);
      if (arg.kind == ExprKind::Name && !locals.count(arg.text)) {
        if (auto it = index_.functions().find(arg.text); it != index_.functions().end()) {
          enqueue(it->second.def, "", item.definite);
        }
      }
    }
    switch (callee.kind) {
      case ExprKind::Subscript:
        visit_subscript_call(callee, item, e.loc.line);
        break;
      case ExprKind::Name:
        visit_name_call(callee, item, locals, e.loc.line);
        break;
      case ExprKind::Attribute:
        visit_attribute_call(callee, item, locals, e.loc.line);
        break;
      case ExprKind::Call: {
        std::string inner = index_.resolve(*callee.operand(0));
        if (inner == "getattr") {
          dynamic_dispatch(item);
        } else if (auto hit = match_forbidden_module(inner)) {
          add_forbidden(*hit, inner, item, e.loc.line);
        }
        break;
      }
      default:
        break;
    }
  }

  void visit_subscript_call(const Expr& callee, const Item& item, int line) {
    const Expr& base = *callee.operand(0);
    if (base.kind == ExprKind::Name) {
      if (index_.is_kernel(base.text)) {
        report_.launches_found.push_back({base.text, qualified(item), line, true, item.definite});
      } else {
        report_.launches_found.push_back({base.text, qualified(item), line, false, false});
      }
      return;
    }
    if (is_self_attr(base)) check_self_attr(base.text, item, line);
  }

  void visit_name_call(const Expr& callee, const Item& item, const std::set<std::string>& locals, int line) {
    const std::string& name = callee.text;
    if (locals.count(name)) {
      dynamic_dispatch(item);
      return;
    }
    if (auto it = index_.functions().find(name); it != index_.functions().end()) {
      enqueue(it->second.def, "", item.definite);
      return;
    }
    if (find_class(name)) {
      enqueue_class(name, item.definite);
      return;
    }
    std::string path = index_.resolve(callee);
    if (auto hit = match_forbidden_function(path)) add_forbidden(*hit, path, item, line);
  }

  void visit_attribute_call(const Expr& callee, const Item& item, const std::set<std::string>& locals, int line) {
    const Expr& base = *callee.operand(0);
    const std::string& attr = callee.text;
    if (base.kind == ExprKind::Name && base.text == "self" && !item.owner.empty()) {
      if (const Stmt* m = find_method(item.owner, attr)) {
        enqueue(m, item.owner, item.definite);
      } else {
        check_self_attr(attr, item, line);
      }
      return;
    }
    if (base.kind == ExprKind::Name && !locals.count(base.text) && find_class(base.text)) {
      if (attr == "apply") {
        enqueue(find_method(base.text, "forward"), base.text, item.definite);
      } else {
        enqueue(find_method(base.text, attr), base.text, item.definite);
      }
      return;
    }
    std::string path = index_.resolve(callee);
    if (!path.empty() && index_.is_import_rooted(path)) {
      if (auto hit = match_forbidden_function(path)) add_forbidden(*hit, path, item, line);
      return;
    }
    if (auto hit = match_tensor_method(attr)) {
      add_forbidden(*hit, path.empty() ? "." + attr : path, item, line);
    }
  }

  static bool is_self_attr(const Expr& e) {
    return e.kind == ExprKind::Attribute && e.operand(0)->kind == ExprKind::Name && e.operand(0)->text == "self";
  }

  // Calls through `self.<attr>`: judged by what the attribute was bound to.
  void check_self_attr(const std::string& attr, const Item& item, int line) {
    const ClassInfo* cls = find_class(item.owner);
    if (!cls) return;
    auto it = cls->self_attrs.find(attr);
    if (it == cls->self_attrs.end()) return;
    for (const Expr* value : it->second) classify_binding(*value, item, line, true);
  }

  void classify_binding(const Expr& value, const Item& item, int line, bool allow_dynamic) {
    if (value.kind == ExprKind::Call) {
      std::string ctor = index_.resolve(*value.operand(0));
      if (auto hit = match_forbidden_module(ctor)) {
        add_forbidden(*hit, ctor, item, line);
      } else if (is_container_module(ctor)) {
        for (std::size_t i = 1; i < value.operands.size(); ++i) {
          python::walk(*value.operand(i), [&](const Expr& sub) {
            if (sub.kind == ExprKind::Call) classify_binding(sub, item, line, false);
          });
        }
      } else if (value.operand(0)->kind == ExprKind::Name && find_class(value.operand(0)->text)) {
        enqueue_class(value.operand(0)->text, item.definite);
      }
      return;
    }
    if (value.kind == ExprKind::Name) {
      if (auto fn = index_.functions().find(value.text); fn != index_.functions().end()) {
        enqueue(fn->second.def, "", item.definite);
        return;
      }
      if (find_class(value.text)) {
        enqueue_class(value.text, item.definite);
        return;
      }
      std::string path = index_.resolve(value);
      if (auto hit = match_forbidden_function(path)) {
        add_forbidden(*hit, path, item, line);
        return;
      }
    }
    if (allow_dynamic && value.kind != ExprKind::Attribute) dynamic_dispatch(item);
  }

  // The callee cannot be resolved statically: every free function may run,
  // and every compute submodule of the class is presumed used.
  void dynamic_dispatch(const Item& item) {
    for (const auto& [name, info] : index_.functions()) enqueue(info.def, "", false);
    const ClassInfo* cls = find_class(item.owner);
    if (!cls) return;
    for (const auto& [attr, values] : cls->self_attrs) {
      for (const Expr* v : values) {
        if (v->kind != ExprKind::Call) continue;
        std::string ctor = index_.resolve(*v->operand(0));
        if (auto hit = match_forbidden_module(ctor)) add_forbidden(*hit, ctor, item, v->loc.line);
      }
    }
  }

  void sweep_unvisited(const Stmt& fn, const std::string& owner) {
    if (definite_.count(&fn) || possible_.count(&fn)) return;
    if (index_.is_kernel(fn.name) && index_.kernels().at(fn.name) == &fn) return;
    Item item{&fn, owner, false};
    std::function<void(const Suite&)> scan = [&](const Suite& suite) {
      for (const auto& s : suite) {
        python::for_each_expr(*s, [&](const Expr& root) {
          python::walk(root, [&](const Expr& e) {
            if (e.kind == ExprKind::Call && e.operand(0)->kind == ExprKind::Subscript &&
                e.operand(0)->operand(0)->kind == ExprKind::Name) {
              const std::string& k = e.operand(0)->operand(0)->text;
              report_.launches_found.push_back({k, qualified(item), e.loc.line, index_.is_kernel(k), false});
            }
          });
        });
        python::for_each_suite(*s, scan);
      }
    };
    scan(fn.body);
  }

  const ModuleIndex& index_;
  LintReport& report_;
  std::deque<Item> queue_;
  std::set<const Stmt*> definite_;
  std::set<const Stmt*> possible_;
  std::set<std::pair<int, std::string>> seen_forbidden_;
};

std::string pick_entry_class(const ModuleIndex& index) {
  if (index.classes().count("ModelNew")) return "ModelNew";
  for (auto it = index.class_order().rbegin(); it != index.class_order().rend(); ++it) {
    if (index.classes().at(*it).methods.count("forward")) return *it;
  }
  return {};
}

void append_shape(const std::vector<std::int64_t>& dims, std::set<std::int64_t>& out) {
  std::int64_t product = 1;
  for (auto it = dims.rbegin(); it != dims.rend(); ++it) {
    if (*it <= 0) return;
    if (*it > 1) out.insert(*it);
    product *= *it;
    if (product > 1) out.insert(product);
    if (product > (std::int64_t{1} << 40)) return;
  }
}

std::optional<std::int64_t> int_value(const Expr& e, const std::map<std::string, std::int64_t>& constants) {
  if (e.kind == ExprKind::Number) {
    std::string digits;
    for (char c : e.text) {
      if (c != '_') digits.push_back(c);
    }
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) return std::nullopt;
    return std::stoll(digits);
  }
  if (e.kind == ExprKind::Name) {
    if (auto it = constants.find(e.text); it != constants.end()) return it->second;
  }
  return std::nullopt;
}

std::vector<std::int64_t> dims_of(const std::vector<const Expr*>& args,
                                  const std::map<std::string, std::int64_t>& constants) {
  std::vector<const Expr*> flat = args;
  if (flat.size() == 1 && (flat[0]->kind == ExprKind::List || flat[0]->kind == ExprKind::Tuple)) {
    flat.clear();
    for (const auto& op : args[0]->operands) flat.push_back(op.get());
  }
  std::vector<std::int64_t> dims;
  for (const Expr* a : flat) {
    auto v = int_value(*a, constants);
    if (!v) return {};
    dims.push_back(*v);
  }
  return dims;
}

std::vector<std::int64_t> shape_values_from_ast(const python::Module& module) {
  ModuleIndex index(module);
  std::map<std::string, std::int64_t> constants;
  auto collect_constants = [&](const Suite& suite) {
    for (const auto& s : suite) {
      if (s->kind == StmtKind::Assign && s->targets.size() == 1 && s->targets[0]->kind == ExprKind::Name) {
        if (auto v = int_value(*s->value, constants)) constants[s->targets[0]->text] = *v;
      }
    }
  };
  collect_constants(module.body);
  std::set<std::int64_t> out;
  for (const auto& s : module.body) {
    if (s->kind != StmtKind::FunctionDef || s->name != "get_inputs") continue;
    collect_constants(s->body);
    std::function<void(const Suite&)> scan = [&](const Suite& suite) {
      for (const auto& st : suite) {
        python::for_each_expr(*st, [&](const Expr& root) {
          python::walk(root, [&](const Expr& e) {
            if (e.kind != ExprKind::Call) return;
            std::string path = index.resolve(*e.operand(0));
            static const std::set<std::string> factories = {"torch.rand",  "torch.randn", "torch.zeros",
                                                            "torch.ones",  "torch.empty", "torch.full"};
            std::vector<const Expr*> args;
            if (factories.count(path)) {
              for (std::size_t i = 1; i < e.operands.size(); ++i) args.push_back(e.operand(i));
              if (path == "torch.full" && !args.empty()) args.resize(1);
            } else if (path == "torch.randint") {
              if (e.operands.size() > 3) args.push_back(e.operand(3));
              for (const auto& kw : e.keywords) {
                if (kw.name == "size") args.assign(1, kw.value.get());
              }
            } else {
              return;
            }
            for (const auto& kw : e.keywords) {
              if (kw.name == "size" && path != "torch.randint") args.assign(1, kw.value.get());
            }
            append_shape(dims_of(args, constants), out);
          });
        });
        python::for_each_suite(*st, scan);
      }
    };
    scan(s->body);
  }
  return {out.begin(), out.end()};
}

std::vector<std::int64_t> shape_values_from_text(std::string_view source) {
  std::string text(source);
  std::map<std::string, std::int64_t> constants;
  static const std::regex assign_re(R"(^\s*([A-Za-z_]\w*)\s*=\s*(\d+)\s*(#.*)?$)", std::regex::multiline);
  for (std::sregex_iterator it(text.begin(), text.end(), assign_re), end; it != end; ++it) {
    constants[(*it)[1].str()] = std::stoll((*it)[2].str());
  }
  static const std::regex call_re(R"(torch\.(rand|randn|zeros|ones|empty)\(\s*\[?([\w\s,]*)\]?\s*[,)])");
  static const std::regex token_re(R"([A-Za-z_]\w*|\d+)");
  std::set<std::int64_t> out;
  for (std::sregex_iterator it(text.begin(), text.end(), call_re), end; it != end; ++it) {
    std::string args = (*it)[2].str();
    std::vector<std::int64_t> dims;
    bool ok = true;
    for (std::sregex_iterator t(args.begin(), args.end(), token_re); t != end; ++t) {
      std::string tok = t->str();
      if (std::isdigit(static_cast<unsigned char>(tok[0]))) {
        dims.push_back(std::stoll(tok));
      } else if (auto c = constants.find(tok); c != constants.end()) {
        dims.push_back(c->second);
      } else {
        ok = false;
        break;
      }
    }
    if (ok) append_shape(dims, out);
  }
  return {out.begin(), out.end()};
}

}  // namespace

bool LintReport::launch_reachable() const {
  return std::any_of(launches_found.begin(), launches_found.end(),
                     [](const LaunchSite& l) { return l.resolved && l.reachable; });
}

bool check_syntax(std::string_view code) {
  try {
    python::Module module = python::parse(code);
    return !ModuleIndex(module).kernels().empty();
  } catch (const python::ParseError&) {
    return false;
  }
}

LintReport lint_functionality(std::string_view code, const LintOptions& options) {
  LintReport report;
  python::Module module;
  try {
    module = python::parse(code);
  } catch (const python::ParseError& e) {
    report.parse_error = e.what();
    return report;
  }
  ModuleIndex index(module);
  report.kernels_found = index.kernel_order();
  report.syntax_ok = !report.kernels_found.empty();
  report.entry_class = pick_entry_class(index);

  ReachabilityWalker walker(index, report);
  walker.run(report.entry_class);
  std::stable_sort(report.launches_found.begin(), report.launches_found.end(),
                   [](const LaunchSite& a, const LaunchSite& b) { return a.line < b.line; });
  std::stable_sort(report.forbidden_calls.begin(), report.forbidden_calls.end(),
                   [](const ForbiddenCall& a, const ForbiddenCall& b) { return a.line < b.line; });

  for (const auto& name : index.kernel_order()) {
    KernelDataflow flow = analyze_kernel(index, name, *index.kernels().at(name), options.input_shape_values);
    for (auto& f : flow.dummy_flags) report.dummy_kernel_flags.push_back(std::move(f));
    for (auto& h : flow.hardcode_flags) report.hardcode_flags.push_back(std::move(h));
  }
  return report;
}

std::vector<KernelFlag> detect_dummy_kernel(std::string_view code) {
  std::vector<KernelFlag> out;
  try {
    python::Module module = python::parse(code);
    ModuleIndex index(module);
    for (const auto& name : index.kernel_order()) {
      auto flow = analyze_kernel(index, name, *index.kernels().at(name), {});
      out.insert(out.end(), flow.dummy_flags.begin(), flow.dummy_flags.end());
    }
  } catch (const python::ParseError&) {
    out.clear();
  }
  return out;
}

std::vector<std::int64_t> input_shape_values(std::string_view reference_source) {
  try {
    return shape_values_from_ast(python::parse(reference_source));
  } catch (const python::ParseError&) {
    return shape_values_from_text(reference_source);
  }
}

std::vector<LintReport> lint_batch_serial(std::span<const std::string> codes, const LintOptions& options) {
  std::vector<LintReport> out;
  out.reserve(codes.size());
  for (const auto& c : codes) out.push_back(lint_functionality(c, options));
  return out;
}

std::vector<LintReport> lint_batch(std::span<const std::string> codes, const LintOptions& options) {
  std::vector<LintReport> out(codes.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::ptrdiff_t>(codes.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = lint_functionality(codes[static_cast<std::size_t>(i)], options);
    } catch (...) {
#pragma omp critical(forge_lint_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace forge::lint
