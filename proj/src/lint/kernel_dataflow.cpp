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

#include "kernel_dataflow.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

namespace forge::lint {

namespace {

using python::Expr;
using python::ExprKind;
using python::Stmt;
using python::StmtKind;
using python::Suite;

// Value lattice: bit set over {carries loaded data unchanged, derived from
// loaded data through computation}. Zero means no data dependence.
using ValueClass = unsigned;
constexpr ValueClass kLoaded = 1U;
constexpr ValueClass kComputed = 2U;
constexpr ValueClass kData = kLoaded | kComputed;

bool is_identity_op(const std::string& path) {
  static const std::set<std::string> ops = {
      "triton.language.reshape",    "triton.language.view",          "triton.language.broadcast_to",
      "triton.language.broadcast",  "triton.language.expand_dims",   "triton.language.cast",
      "triton.language.multiple_of", "triton.language.max_contiguous", "triton.language.max_constancy",
      "triton.language.ravel",
  };
  return ops.count(path) > 0;
}

bool is_identity_method(const std::string& method) {
  return method == "to" || method == "reshape" || method == "view" || method == "broadcast_to" ||
         method == "expand_dims" || method == "ravel";
}

bool is_store(const std::string& path) { return path == "triton.language.store"; }

bool is_atomic(const std::string& path) {
  return path.rfind("triton.language.atomic_", 0) == 0;
}

class KernelAnalyzer {
 public:
  KernelAnalyzer(const ModuleIndex& index, const std::string& name, const Stmt& kernel)
      : index_(index), name_(name), kernel_(kernel) {}

  KernelDataflow run(const std::vector<std::int64_t>& shape_values) {
    // Fixed point over the monotone OR of assignment classes.
    for (int iter = 0; iter < 64; ++iter) {
      changed_ = false;
      propagate(kernel_.body);
      if (!changed_) break;
    }
    collect_reads(kernel_.body);
    collect_stores(kernel_.body);

    KernelDataflow out;
    const int line = kernel_.loc.line;
    if (stores_.empty()) {
      out.dummy_flags.push_back({name_, "no store", "kernel never writes to memory", line});
    } else {
      bool any_computed = false;
      bool any_loaded = false;
      for (const auto& st : stores_) {
        any_computed |= (st.cls & kComputed) != 0 || st.atomic;
        any_loaded |= (st.cls & kLoaded) != 0;
      }
      if (!any_computed && any_loaded) {
        out.dummy_flags.push_back({name_, "identity store", "stored values are loaded data without any transform", line});
      }
    }
    for (const auto& [var, def_line] : computed_defs_) {
      if (reads_.count(var) == 0) {
        out.dummy_flags.push_back({name_, "dead computation", "'" + var + "' is computed but never used", def_line});
      }
    }
    for (const auto& st : stores_) {
      if ((st.cls & kData) == 0 && !st.atomic) {
        out.hardcode_flags.push_back({name_ + ":" + std::to_string(st.line), st.literal, "constant store"});
      }
    }
    if (!shape_values.empty()) collect_shape_literals(shape_values, out);
    return out;
  }

 private:
  struct StoreSite {
    ValueClass cls = 0;
    bool atomic = false;
    int line = 0;
    std::string literal;
  };

  ValueClass var_class(const std::string& name) const {
    auto it = vars_.find(name);
    return it == vars_.end() ? 0 : it->second;
  }

  void assign(const std::string& name, ValueClass cls, int line) {
    ValueClass& slot = vars_[name];
    if ((slot | cls) != slot) {
      slot |= cls;
      changed_ = true;
    }
    if ((cls & kComputed) && !computed_defs_.count(name)) computed_defs_[name] = line;
  }

  void assign_target(const Expr& target, ValueClass cls, int line) {
    if (target.kind == ExprKind::Name) {
      assign(target.text, cls, line);
    } else if (target.kind == ExprKind::Tuple || target.kind == ExprKind::List) {
      for (const auto& elt : target.operands) assign_target(*elt, cls, line);
    } else if (target.kind == ExprKind::Starred) {
      assign_target(*target.operand(0), cls, line);
    }
  }

  ValueClass classify(const Expr& e) const {
    switch (e.kind) {
      case ExprKind::Name:
        return var_class(e.text);
      case ExprKind::Number:
      case ExprKind::String:
      case ExprKind::Constant:
        return 0;
      case ExprKind::Subscript:
        return classify(*e.operand(0));
      case ExprKind::Attribute:
        return classify(*e.operand(0));
      case ExprKind::IfExp:
        return classify(*e.operand(0)) | classify(*e.operand(2));
      case ExprKind::Tuple:
      case ExprKind::List: {
        ValueClass c = 0;
        for (const auto& op : e.operands) c |= classify(*op);
        return c;
      }
      case ExprKind::Starred:
      case ExprKind::NamedExpr:
        return classify(*e.operands.back());
      case ExprKind::Call:
        return classify_call(e);
      default: {
        // Arithmetic, comparisons, boolean logic over data are computation.
        ValueClass c = 0;
        python::for_each_child(e, [&](const Expr& child) { c |= classify(child); });
        return (c & kData) ? kComputed : 0;
      }
    }
  }

  ValueClass classify_call(const Expr& call) const {
    const Expr* callee = call.operand(0);
    std::string path = index_.resolve(*callee);
    if (path == "triton.language.load") return kLoaded;
    ValueClass args = 0;
    for (std::size_t i = 1; i < call.operands.size(); ++i) args |= classify(*call.operands[i]);
    for (const auto& kw : call.keywords) args |= classify(*kw.value);
    if (callee->kind == ExprKind::Attribute && !index_.is_import_rooted(path)) {
      ValueClass base = classify(*callee->operand(0));
      if (is_identity_method(callee->text)) return base;
      return ((base | args) & kData) ? kComputed : 0;
    }
    if (is_identity_op(path)) return call.operands.size() > 1 ? classify(*call.operands[1]) : 0;
    return (args & kData) ? kComputed : 0;
  }

  void propagate(const Suite& suite) {
    for (const auto& s : suite) {
      switch (s->kind) {
        case StmtKind::Assign:
          for (const auto& t : s->targets) assign_target(*t, classify(*s->value), s->loc.line);
          break;
        case StmtKind::AnnAssign:
          if (s->value) assign_target(*s->targets[0], classify(*s->value), s->loc.line);
          break;
        case StmtKind::AugAssign: {
          ValueClass c = classify(*s->targets[0]) | classify(*s->value);
          assign_target(*s->targets[0], (c & kData) ? kComputed : 0, s->loc.line);
          break;
        }
        case StmtKind::For:
          assign_target(*s->targets[0], classify(*s->value), s->loc.line);
          break;
        case StmtKind::With:
          for (const auto& item : s->items) {
            if (item.target) assign_target(*item.target, classify(*item.context), s->loc.line);
          }
          break;
        case StmtKind::Expression:
          if (s->value->kind == ExprKind::NamedExpr) {
            assign(s->value->operand(0)->text, classify(*s->value->operand(1)), s->loc.line);
          }
          break;
        default:
          break;
      }
      if (s->kind != StmtKind::FunctionDef && s->kind != StmtKind::ClassDef) {
        python::for_each_suite(*s, [this](const Suite& inner) { propagate(inner); });
      }
    }
  }

  void note_reads(const Expr& e) {
    python::walk(e, [this](const Expr& sub) {
      if (sub.kind == ExprKind::Name) reads_.insert(sub.text);
    });
  }

  // Reads are every Name use except bare assignment targets.
  void note_target_reads(const Expr& target) {
    switch (target.kind) {
      case ExprKind::Name:
        return;
      case ExprKind::Tuple:
      case ExprKind::List:
        for (const auto& elt : target.operands) note_target_reads(*elt);
        return;
      case ExprKind::Starred:
        note_target_reads(*target.operand(0));
        return;
      default:
        note_reads(target);
    }
  }

  void collect_reads(const Suite& suite) {
    for (const auto& s : suite) {
      switch (s->kind) {
        case StmtKind::Assign:
        case StmtKind::AnnAssign:
        case StmtKind::AugAssign:
        case StmtKind::For:
          for (const auto& t : s->targets) note_target_reads(*t);
          if (s->value) note_reads(*s->value);
          if (s->annotation) note_reads(*s->annotation);
          break;
        default:
          python::for_each_expr(*s, [this](const Expr& e) { note_reads(e); });
      }
      python::for_each_suite(*s, [this](const Suite& inner) { collect_reads(inner); });
    }
  }

  void collect_stores(const Suite& suite) {
    for (const auto& s : suite) {
      python::for_each_expr(*s, [this](const Expr& root) {
        python::walk(root, [this](const Expr& e) {
          if (e.kind != ExprKind::Call) return;
          std::string path = index_.resolve(*e.operand(0));
          bool atomic = is_atomic(path);
          if (!is_store(path) && !atomic) return;
          const Expr* value = e.operand(2);
          for (const auto& kw : e.keywords) {
            if (kw.name == "value" || kw.name == "val") value = kw.value.get();
          }
          StoreSite site;
          site.atomic = atomic;
          site.line = e.loc.line;
          if (value) {
            site.cls = classify(*value);
            site.literal = describe(*value);
          }
          stores_.push_back(std::move(site));
        });
      });
      python::for_each_suite(*s, [this](const Suite& inner) { collect_stores(inner); });
    }
  }

  std::string describe(const Expr& e) const {
    if (e.kind == ExprKind::Number || e.kind == ExprKind::Constant) return e.text;
    if (e.kind == ExprKind::UnaryOp && e.operand(0)->kind == ExprKind::Number) return e.text + e.operand(0)->text;
    if (e.kind == ExprKind::Call) return python::dotted_name(*e.operand(0)) + "(...)";
    std::string name = python::dotted_name(e);
    return name.empty() ? "<expr>" : name;
  }

  void collect_shape_literals(const std::vector<std::int64_t>& shape_values, KernelDataflow& out) const {
    std::set<std::pair<int, std::string>> seen;
    std::function<void(const Suite&)> scan = [&](const Suite& suite) {
      for (const auto& s : suite) {
        python::for_each_expr(*s, [&](const Expr& root) {
          python::walk(root, [&](const Expr& e) {
            if (e.kind != ExprKind::Number) return;
            std::string digits;
            for (char c : e.text) {
              if (c != '_') digits.push_back(c);
            }
            std::int64_t v = 0;
            auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
            if (ec != std::errc() || ptr != digits.data() + digits.size() || v <= 1) return;
            if (std::find(shape_values.begin(), shape_values.end(), v) == shape_values.end()) return;
            if (seen.emplace(e.loc.line, e.text).second) {
              out.hardcode_flags.push_back({name_ + ":" + std::to_string(e.loc.line), e.text, "shape constant"});
            }
          });
        });
        python::for_each_suite(*s, scan);
      }
    };
    scan(kernel_.body);
  }

  const ModuleIndex& index_;
  std::string name_;
  const Stmt& kernel_;
  std::map<std::string, ValueClass> vars_;
  std::map<std::string, int> computed_defs_;
  std::set<std::string> reads_;
  std::vector<StoreSite> stores_;
  bool changed_ = false;
};

}  // namespace

KernelDataflow analyze_kernel(const ModuleIndex& index, const std::string& name, const Stmt& kernel,
                              const std::vector<std::int64_t>& shape_values) {
  return KernelAnalyzer(index, name, kernel).run(shape_values);
}

}  // namespace forge::lint
