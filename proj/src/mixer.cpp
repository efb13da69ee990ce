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

#include "forge/mixer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <regex>
#include <set>
#include <thread>

#include "forge/error.hpp"
#include "forge/log.hpp"
#include "forge/prompts.hpp"
#include "forge/python/parser.hpp"

namespace forge {

void validate_simplex(std::span<const double> p, double tolerance) {
  if (p.empty()) throw SimplexViolation("mixture has no components");
  double sum = 0.0;
  for (double x : p) {
    if (!std::isfinite(x) || x < 0.0) throw SimplexViolation("mixture component outside [0, 1]");
    sum += x;
  }
  if (std::fabs(sum - 1.0) > tolerance) throw SimplexViolation("mixture sums to " + std::to_string(sum) + ", not 1");
}

namespace {

// 53-bit uniform in [0, 1); std distributions are implementation-defined.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t bound = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

}  // namespace

std::vector<SampledTask> sample_mixture(const std::map<int, std::vector<std::string>>& subsets,
                                        const MixtureConfig& config) {
  validate_simplex(config.p);
  if (config.p.size() != config.subset_ids.size()) {
    throw InvalidArgument("mixture has " + std::to_string(config.p.size()) + " components for " +
                          std::to_string(config.subset_ids.size()) + " subsets");
  }
  std::vector<const std::vector<std::string>*> pools;
  std::size_t last_live = 0;
  for (std::size_t j = 0; j < config.p.size(); ++j) {
    auto it = subsets.find(config.subset_ids[j]);
    const std::vector<std::string>* pool = it == subsets.end() ? nullptr : &it->second;
    if (config.p[j] > 0.0) {
      if (!pool || pool->empty()) throw EmptySubset("level " + std::to_string(config.subset_ids[j]) + " has no tasks");
      last_live = j;
    }
    pools.push_back(pool);
  }

  std::mt19937_64 rng(config.seed);
  std::vector<SampledTask> out;
  out.reserve(config.sample_count);
  for (std::size_t draw = 0; draw < config.sample_count; ++draw) {
    const double u = unit(rng);
    std::size_t j = last_live;
    double cum = 0.0;
    for (std::size_t c = 0; c < config.p.size(); ++c) {
      cum += config.p[c];
      if (config.p[c] > 0.0 && u < cum) {
        j = c;
        break;
      }
    }
    const auto& pool = *pools[j];
    out.push_back({draw, config.subset_ids[j], pool[uniform_index(rng, pool.size())]});
  }
  return out;
}

int parse_level_reply(std::string_view reply) {
  std::string text(reply);
  static const std::regex assigned(R"(\blevel\b\s*\**\s*[:=]\s*\**\s*([A-Za-z0-9_]+))", std::regex::icase);
  static const std::regex mentioned(R"(\blevel\b\s*\**\s*([A-Za-z0-9_]+))", std::regex::icase);
  static const std::regex bare(R"(^\s*\**\s*([123])\s*\**\s*\.?\s*$)");

  auto collect = [&](const std::regex& re) {
    std::set<std::string> found;
    for (std::sregex_iterator it(text.begin(), text.end(), re), end; it != end; ++it) found.insert((*it)[1].str());
    return found;
  };
  auto single_level = [](const std::set<std::string>& found) -> int {
    if (found.size() != 1) return 0;
    const std::string& v = *found.begin();
    return v == "1" || v == "2" || v == "3" ? v[0] - '0' : 0;
  };

  if (auto found = collect(assigned); !found.empty()) {
    if (int level = single_level(found)) return level;
    throw UnparseableReply("reply does not assign exactly one level in {1, 2, 3}: " + text.substr(0, 200));
  }
  if (int level = single_level(collect(mentioned))) return level;
  std::smatch m;
  if (std::regex_match(text, m, bare)) return m[1].str()[0] - '0';
  throw UnparseableReply("no level assignment in reply: " + text.substr(0, 200));
}

namespace {

using python::Expr;
using python::ExprKind;
using python::Stmt;
using python::StmtKind;
using python::Suite;

const std::set<std::string>& layout_ops() {
  static const std::set<std::string> ops = {
      "view",     "reshape",   "permute",   "transpose", "contiguous", "size",       "dim",        "unsqueeze",
      "squeeze",  "flatten",   "expand",    "expand_as", "to",         "cuda",       "cpu",        "float",
      "double",   "half",      "bfloat16",  "type",      "clone",      "detach",     "zeros",      "ones",
      "empty",    "zeros_like", "ones_like", "empty_like", "full",     "full_like",  "rand",       "randn",
      "tensor",   "arange",    "numel",     "item",      "chunk",      "split",      "unbind",     "view_as",
      "reshape_as", "t",       "super",     "len",       "range",      "int",        "isinstance", "tuple",
      "list",     "getattr",   "print",     "narrow",    "select",     "movedim",    "unflatten",
      "repeat",   "requires_grad_", "parameters", "register_buffer", "no_grad", "device", "dtype", "enumerate",
      "zip",      "Parameter", "Sequential", "ModuleList", "ModuleDict", "Identity",
      "Dropout",  "dropout",   "Flatten",   "Unflatten",
  };
  return ops;
}

std::string op_key(std::string name) {
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  return name;
}

std::string binop_key(const std::string& op) {
  static const std::map<std::string, std::string> names = {
      {"+", "add"}, {"-", "sub"}, {"*", "mul"}, {"/", "div"}, {"//", "floordiv"},
      {"%", "mod"}, {"**", "pow"}, {"@", "matmul"},
  };
  auto it = names.find(op);
  return it == names.end() ? "" : it->second;
}

std::string last_segment(const std::string& path) {
  auto dot = path.rfind('.');
  return dot == std::string::npos ? path : path.substr(dot + 1);
}

class OpCollector {
 public:
  explicit OpCollector(const python::Module& m) {
    for (const auto& s : m.body) {
      if (s->kind == StmtKind::Import || s->kind == StmtKind::ImportFrom) {
        for (const auto& a : s->aliases) import_names_.insert(a.asname.empty() ? a.name.substr(0, a.name.find('.')) : a.asname);
      }
      if (s->kind == StmtKind::ClassDef && (s->name == "Model" || !model_)) {
        if (s->name == "Model") model_ = s.get();
        else if (has_forward(*s)) fallback_ = s.get();
      }
    }
    if (!model_) model_ = fallback_;
  }

  std::set<std::string> run() {
    if (!model_) return ops_;
    // self.<attr> bindings from every method.
    for (const auto& member : model_->body) {
      if (member->kind != StmtKind::FunctionDef) continue;
      scan_bindings(member->body);
    }
    for (const auto& member : model_->body) {
      if (member->kind != StmtKind::FunctionDef || member->name == "__init__") continue;
      scan_compute(member->body);
    }
    return ops_;
  }

 private:
  static bool has_forward(const Stmt& cls) {
    return std::any_of(cls.body.begin(), cls.body.end(),
                       [](const auto& m) { return m->kind == StmtKind::FunctionDef && m->name == "forward"; });
  }

  void scan_bindings(const Suite& suite) {
    for (const auto& s : suite) {
      if (s->kind == StmtKind::Assign && s->value) {
        for (const auto& t : s->targets) {
          if (t->kind == ExprKind::Attribute && t->operand(0)->kind == ExprKind::Name && t->operand(0)->text == "self") {
            bindings_[t->text] = s->value.get();
          }
        }
      }
      python::for_each_suite(*s, [this](const Suite& inner) { scan_bindings(inner); });
    }
  }

  void add(const std::string& name) {
    if (name.empty() || layout_ops().count(name) || name.rfind("__", 0) == 0) return;
    ops_.insert(op_key(name));
  }

  void add_module_ops(const Expr& value) {
    python::walk(value, [this](const Expr& e) {
      if (e.kind != ExprKind::Call) return;
      std::string name = last_segment(python::dotted_name(*e.operand(0)));
      add(name);
    });
  }

  void scan_compute(const Suite& suite) {
    for (const auto& s : suite) {
      if (s->kind == StmtKind::AugAssign) add(binop_key(s->op));
      python::for_each_expr(*s, [this](const Expr& root) {
        python::walk(root, [this](const Expr& e) { visit(e); });
      });
      python::for_each_suite(*s, [this](const Suite& inner) { scan_compute(inner); });
    }
  }

  void visit(const Expr& e) {
    if (e.kind == ExprKind::BinOp) {
      add(binop_key(e.text));
      return;
    }
    if (e.kind != ExprKind::Call) return;
    const Expr& callee = *e.operand(0);
    if (callee.kind == ExprKind::Attribute && callee.operand(0)->kind == ExprKind::Name &&
        callee.operand(0)->text == "self") {
      if (auto it = bindings_.find(callee.text); it != bindings_.end()) add_module_ops(*it->second);
      return;
    }
    if (callee.kind == ExprKind::Subscript) {
      const Expr& base = *callee.operand(0);
      if (base.kind == ExprKind::Attribute && base.operand(0)->kind == ExprKind::Name && base.operand(0)->text == "self") {
        if (auto it = bindings_.find(base.text); it != bindings_.end()) add_module_ops(*it->second);
      }
      return;
    }
    if (callee.kind == ExprKind::Attribute) {
      add(callee.text);
    } else if (callee.kind == ExprKind::Name && import_names_.count(callee.text)) {
      add(callee.text);
    }
  }

  const Stmt* model_ = nullptr;
  const Stmt* fallback_ = nullptr;
  std::set<std::string> import_names_;
  std::map<std::string, const Expr*> bindings_;
  std::set<std::string> ops_;
};

// For references that do not parse (flattened indentation is common).
std::set<std::string> ops_from_text(const std::string& text) {
  static const std::regex call_re(R"(\b(?:torch|F|nn|functional)\.(?:[A-Za-z_]\w*\.)*([A-Za-z_]\w*)\s*\()");
  std::set<std::string> out;
  auto keep = [&](const std::string& name) {
    if (!name.empty() && !layout_ops().count(name) && name.rfind("__", 0) != 0) out.insert(op_key(name));
  };
  for (std::sregex_iterator it(text.begin(), text.end(), call_re), end; it != end; ++it) keep((*it)[1].str());
  return out;
}

}  // namespace

std::vector<std::string> compute_ops(std::string_view reference_source) {
  std::set<std::string> ops;
  try {
    python::Module m = python::parse(reference_source);
    ops = OpCollector(m).run();
  } catch (const python::ParseError&) {
    ops = ops_from_text(std::string(reference_source));
  }
  return {ops.begin(), ops.end()};
}

void to_json(nlohmann::json& j, const DifficultyLabel& l) {
  j = nlohmann::json{{"schema_version", 1}, {"task_id", l.task_id}, {"level", l.level},
                     {"labeler", l.labeler}, {"raw_reply", l.raw_reply}};
}

void from_json(const nlohmann::json& j, DifficultyLabel& l) {
  l.task_id = j.at("task_id").get<std::string>();
  l.level = j.at("level").get<int>();
  if (l.level < 1 || l.level > 3) throw SchemaError("level must be 1, 2 or 3");
  l.labeler = j.value("labeler", std::string());
  l.raw_reply = j.value("raw_reply", std::string());
}

void to_json(nlohmann::json& j, const SampledTask& t) {
  j = nlohmann::json{{"schema_version", 1}, {"draw", t.draw}, {"level", t.level}, {"task_id", t.task_id}};
}

int level_for_op_count(std::size_t ops) {
  if (ops <= 1) return 1;
  if (ops <= 4) return 2;
  return 3;
}

DifficultyLabel StubLabeler::label(const TaskSpec& task) {
  auto ops = compute_ops(task.reference_source);
  DifficultyLabel l;
  l.task_id = task.task_id;
  l.level = level_for_op_count(ops.size());
  l.labeler = "stub";
  std::string joined;
  for (const auto& op : ops) joined += (joined.empty() ? "" : ",") + op;
  l.raw_reply = "Level: " + std::to_string(l.level) + " (ops: " + joined + ")";
  return l;
}

namespace {

std::string env_fallback(const char* primary, const char* fallback) {
  if (const char* v = std::getenv(primary); v && *v) return v;
  if (const char* v = std::getenv(fallback); v && *v) return v;
  return {};
}

}  // namespace

RemoteLabelerConfig RemoteLabelerConfig::from_env() {
  RemoteLabelerConfig c;
  c.url = env_fallback("FORGE_LABELER_URL", "FORGE_JUDGE_URL");
  c.model = env_fallback("FORGE_LABELER_MODEL", "FORGE_JUDGE_MODEL");
  c.api_key = env_fallback("FORGE_LABELER_KEY", "FORGE_JUDGE_KEY");
  if (c.url.empty()) throw ConfigError("FORGE_LABELER_URL (or FORGE_JUDGE_URL) is not set");
  if (c.model.empty()) throw ConfigError("FORGE_LABELER_MODEL (or FORGE_JUDGE_MODEL) is not set");
  return c;
}

RemoteLabeler::RemoteLabeler(RemoteLabelerConfig config, http::PostFn post, Sleep sleep)
    : config_(std::move(config)),
      post_(post ? std::move(post) : http::make_poster(config_.timeout_seconds)),
      sleep_(sleep ? std::move(sleep) : Sleep([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      slots_(std::clamp(config_.max_in_flight, 1, 1024)) {}

DifficultyLabel RemoteLabeler::label(const TaskSpec& task) {
  http::ChatRequest req;
  req.url = config_.url;
  req.model = config_.model;
  req.api_key = config_.api_key;
  req.user = prompts::difficulty_label(task.reference_source);
  req.temperature = config_.temperature;
  req.top_p = config_.top_p;

  slots_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{slots_};

  int transport_failures = 0;
  int unparseable = 0;
  auto backoff = config_.initial_backoff;
  for (;;) {
    std::string content;
    try {
      content = http::chat(post_, req);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      if (++transport_failures > config_.max_retries) {
        throw LabelerUnavailable(std::string("labeler unavailable: ") + e.what());
      }
      log::warn(std::string("labeler request failed, backing off: ") + e.what());
      sleep_(backoff);
      backoff *= 2;
      continue;
    }
    try {
      DifficultyLabel l;
      l.task_id = task.task_id;
      l.level = parse_level_reply(content);
      l.labeler = name();
      l.raw_reply = content;
      return l;
    } catch (const UnparseableReply&) {
      if (++unparseable > 1) throw;
      log::warn("labeler reply unparseable, retrying once");
    }
  }
}

std::unique_ptr<Labeler> make_labeler(std::string_view mode) {
  if (mode == "stub") return std::make_unique<StubLabeler>();
  if (mode == "remote") return std::make_unique<RemoteLabeler>(RemoteLabelerConfig::from_env());
  throw ConfigError("unknown labeler mode '" + std::string(mode) + "' (expected stub or remote)");
}

std::vector<MixtureScore> score_mixture(std::span<const MixtureCandidate> mixtures, std::span<const int> test_subsets,
                                        MixtureScoreBy by) {
  std::vector<MixtureScore> out;
  for (std::size_t i = 0; i < mixtures.size(); ++i) {
    MixtureScore s;
    s.index = i;
    s.p = mixtures[i].p;
    for (int subset : test_subsets) {
      auto it = mixtures[i].per_subset.find(subset);
      if (it == mixtures[i].per_subset.end()) {
        throw MissingCell("mixture " + std::to_string(i) + " has no result for test subset " + std::to_string(subset));
      }
      s.score += by == MixtureScoreBy::Correct ? it->second.correct : it->second.mean_speedup;
    }
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const MixtureScore& a, const MixtureScore& b) { return a.score > b.score; });
  return out;
}

}  // namespace forge
