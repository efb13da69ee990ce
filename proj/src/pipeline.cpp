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

#include "forge/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "forge/concurrency.hpp"
#include "forge/error.hpp"
#include "forge/jsonl.hpp"
#include "forge/log.hpp"
#include "forge/records.hpp"

namespace forge {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------- config

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string_view raw) {
  std::string v = trim(raw);
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

std::vector<std::string> list_items(std::string_view raw) {
  std::string v = trim(raw);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw ConfigError("unterminated list: " + v);
    v = v.substr(1, v.size() - 2);
  }
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string t = unquote(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

template <class T>
T parse_number(std::string_view key, std::string_view raw) {
  std::string v = unquote(raw);
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("'" + std::string(key) + "' expects a number, got '" + v + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view raw) {
  std::string v = unquote(raw);
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ConfigError("'" + std::string(key) + "' expects true/false, got '" + v + "'");
}

}  // namespace

void apply_setting(PipelineConfig& c, std::string_view key_in, std::string_view value) {
  const std::string key = trim(key_in);
  auto num = [&](auto& field) { field = parse_number<std::remove_reference_t<decltype(field)>>(key, value); };
  if (key == "tasks") c.tasks = unquote(value);
  else if (key == "responses") c.responses = unquote(value);
  else if (key == "tokens") c.tokens = unquote(value);
  else if (key == "out_dir") c.out_dir = unquote(value);
  else if (key == "judge") c.judge = unquote(value);
  else if (key == "runner_cmd") c.runner_cmd = unquote(value);
  else if (key == "budget_seconds" || key == "timeout") num(c.budget_seconds);
  else if (key == "memory_cap_bytes") num(c.memory_cap_bytes);
  else if (key == "repetitions") num(c.repetitions);
  else if (key == "warmups") num(c.warmups);
  else if (key == "atol") num(c.tolerance.atol);
  else if (key == "rtol") num(c.tolerance.rtol);
  else if (key == "devices") c.devices = list_items(value);
  else if (key == "workers") num(c.workers);
  else if (key == "group_size") num(c.group_size);
  else if (key == "mode" || key == "reward_mode") {
    std::string m = unquote(value);
    if (m == "hier" || m == "hierarchical") c.reward_mode = RewardMode::Hierarchical;
    else if (m == "uniform") c.reward_mode = RewardMode::Uniform;
    else throw ConfigError("reward mode must be hier or uniform, got '" + m + "'");
  } else if (key == "alpha") num(c.alpha);
  else if (key == "beta") num(c.beta);
  else if (key == "epsilon") num(c.epsilon);
  else if (key == "normalize_std") c.normalize_std = parse_bool(key, value);
  else if (key == "k") {
    c.k.clear();
    for (const auto& item : list_items(value)) c.k.push_back(parse_number<int>(key, item));
  } else if (key == "fast" || key == "fast_p") {
    c.fast_p.clear();
    for (const auto& item : list_items(value)) c.fast_p.push_back(parse_number<double>(key, item));
  } else if (key == "robust") c.robust = parse_bool(key, value);
  else if (key == "unbiased") c.unbiased = parse_bool(key, value);
  else if (key == "allow_short") c.allow_short = parse_bool(key, value);
  else if (key == "resume") c.resume = parse_bool(key, value);
  else if (key == "seed") num(c.seed);
  else throw ConfigError("unknown setting '" + key + "'");
}

PipelineConfig load_config(const fs::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // A '#' inside quotes is part of the value.
    bool quoted = false;
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char ch = line[i];
      if (quoted) {
        if (ch == quote) quoted = false;
      } else if (ch == '"' || ch == '\'') {
        quoted = true;
        quote = ch;
      } else if (ch == '#') {
        line.resize(i);
        break;
      }
    }
    std::string t = trim(line);
    if (t.empty() || (t.front() == '[' && t.back() == ']' && t.find('=') == std::string::npos)) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      apply_setting(base, t.substr(0, eq), t.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

void validate_config(const PipelineConfig& c, bool need_inputs) {
  if (need_inputs) {
    if (c.tasks.empty() || !fs::exists(c.tasks)) throw ConfigError("tasks file not found: " + c.tasks.string());
    if (c.responses.empty() || !fs::exists(c.responses)) {
      throw ConfigError("responses file not found: " + c.responses.string());
    }
    if (!c.tokens.empty() && !fs::exists(c.tokens)) throw ConfigError("tokens file not found: " + c.tokens.string());
  }
  if (c.judge != "stub" && c.judge != "remote") throw ConfigError("judge must be stub or remote");
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(c.beta >= 0.0 && c.beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  if (c.group_size == 1) throw ConfigError("group_size must be at least 2");
  if (c.k.empty()) throw ConfigError("k list is empty");
  for (int k : c.k) {
    if (k < 1) throw ConfigError("k values must be positive");
  }
  if (c.budget_seconds <= 0.0) throw ConfigError("budget_seconds must be positive");
  if (c.repetitions < 3) throw ConfigError("repetitions must be at least 3 for a trimmed mean");
  if (c.warmups < 0) throw ConfigError("warmups must be non-negative");
  if (c.devices.empty()) throw ConfigError("at least one device is required");
  if (c.workers == 0) throw ConfigError("workers must be positive");
}

// ----------------------------------------------------------------- inputs

std::vector<TaskSpec> load_tasks(const fs::path& path) {
  auto tasks = jsonl::read_records<TaskSpec>(path);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string where = path.string() + ": record " + std::to_string(i + 1) + ": ";
    if (!seen.insert(tasks[i].task_id).second) throw SchemaError(where + "duplicate task_id " + tasks[i].task_id);
    if (!has_reference_entry_points(tasks[i].reference_source)) {
      throw SchemaError(where + "reference_source must define Model, get_inputs and get_init_inputs");
    }
  }
  return tasks;
}

std::vector<CandidateResponse> load_responses(const fs::path& path) {
  auto responses = jsonl::read_records<CandidateResponse>(path);
  std::set<std::pair<std::string, std::uint64_t>> seen;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    if (!seen.emplace(responses[i].task_id, responses[i].sample_index).second) {
      throw SchemaError(path.string() + ": record " + std::to_string(i + 1) + ": duplicate (task_id, sample_index)");
    }
  }
  return responses;
}

// ----------------------------------------------------------------- verify

namespace {

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Identifies the inputs and settings a manifest belongs to.
std::string fingerprint(const PipelineConfig& c) {
  std::uint64_t h = fnv1a(read_file(c.tasks));
  h = fnv1a(read_file(c.responses), h);
  std::ostringstream s;
  s << c.judge << '|' << c.runner_cmd << '|' << c.repetitions << '|' << c.warmups << '|' << c.tolerance.atol << '|'
    << c.tolerance.rtol << '|' << c.robust << '|' << c.budget_seconds;
  h = fnv1a(s.str(), h);
  return hex(h);
}

fs::path work_file(const fs::path& out, const std::string& task_id) {
  return out / "work" / (hex(fnv1a(task_id)) + ".json");
}

json finding_row(const CandidateOutcome& o) {
  json j{{"schema_version", kSchemaVersion},
         {"task_id", o.verdict.task_id},
         {"sample_index", o.verdict.sample_index},
         {"rejected_at", o.rejected_at},
         {"detail", o.detail}};
  if (o.lint) j["lint"] = *o.lint;
  if (o.judge) {
    j["judge"] = {{"valid", o.judge->semantically_valid},
                  {"reason", o.judge->rationale},
                  {"model", o.judge->judge_model}};
  }
  if (o.execution) {
    json e = *o.execution;
    e.erase("error_text");
    j["execution"] = e;
  }
  return j;
}

struct TaskWork {
  std::string task_id;
  std::vector<VerdictRecord> verdicts;
  std::vector<json> findings;
  std::vector<json> runner;
};

json to_work_json(const TaskWork& w) {
  json v = json::array();
  for (const auto& r : w.verdicts) v.push_back(r);
  return json{{"schema_version", kSchemaVersion}, {"task_id", w.task_id}, {"verdicts", v},
              {"findings", w.findings}, {"runner", w.runner}};
}

TaskWork from_work_json(const json& j) {
  TaskWork w;
  w.task_id = j.at("task_id").get<std::string>();
  for (const auto& v : j.at("verdicts")) w.verdicts.push_back(v.get<VerdictRecord>());
  for (const auto& f : j.at("findings")) w.findings.push_back(f);
  for (const auto& r : j.at("runner")) w.runner.push_back(r);
  return w;
}

bool verdict_order(const VerdictRecord& a, const VerdictRecord& b) {
  return std::tie(a.task_id, a.sample_index) < std::tie(b.task_id, b.sample_index);
}

}  // namespace

VerifyResult run_verify(const PipelineConfig& config) {
  validate_config(config);
  auto tasks = load_tasks(config.tasks);
  auto responses = load_responses(config.responses);

  std::map<std::string, const TaskSpec*> task_by_id;
  for (const auto& t : tasks) task_by_id[t.task_id] = &t;
  std::map<std::string, std::vector<const CandidateResponse*>> by_task;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    const auto& r = responses[i];
    if (!task_by_id.count(r.task_id)) {
      throw SchemaError(config.responses.string() + ": record " + std::to_string(i + 1) + ": unknown task_id " +
                        r.task_id);
    }
    by_task[r.task_id].push_back(&r);
  }
  for (auto& [id, list] : by_task) {
    std::sort(list.begin(), list.end(),
              [](const CandidateResponse* a, const CandidateResponse* b) { return a->sample_index < b->sample_index; });
  }

  fs::create_directories(config.out_dir / "work");
  const fs::path manifest_path = config.out_dir / "manifest.json";
  const std::string print = fingerprint(config);
  std::set<std::string> completed;
  if (config.resume && fs::exists(manifest_path)) {
    try {
      json m = json::parse(read_file(manifest_path));
      if (m.value("fingerprint", std::string()) == print) {
        for (const auto& id : m.at("completed")) completed.insert(id.get<std::string>());
      } else {
        log::warn("manifest belongs to different inputs or settings; starting over");
      }
    } catch (const json::exception& e) {
      log::warn(std::string("unreadable manifest ignored: ") + e.what());
    }
  }

  std::vector<std::string> order;
  for (const auto& [id, list] : by_task) order.push_back(id);
  std::vector<TaskWork> results(order.size());
  std::vector<bool> restored(order.size(), false);
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!completed.count(order[i])) continue;
    const fs::path wf = work_file(config.out_dir, order[i]);
    if (!fs::exists(wf)) continue;
    try {
      results[i] = from_work_json(json::parse(read_file(wf)));
      restored[i] = results[i].task_id == order[i] && results[i].verdicts.size() == by_task[order[i]].size();
    } catch (const std::exception& e) {
      log::warn("work file for " + order[i] + " unreadable, recomputing: " + e.what());
    }
    if (!restored[i]) completed.erase(order[i]);
  }

  std::unique_ptr<Judge> judge = make_judge(config.judge);
  GatewayConfig gw;
  gw.runner_cmd = config.runner_cmd;
  gw.budget_seconds = config.budget_seconds;
  gw.repetitions = config.repetitions;
  gw.warmups = config.warmups;
  gw.tolerance = config.tolerance;
  gw.devices = config.devices;
  gw.memory_cap_bytes = config.memory_cap_bytes;
  ExecutionGateway gateway(gw);
  VerifyOptions vopts;
  vopts.ungated = !config.robust;

  std::mutex manifest_mu;
  auto write_manifest = [&] {
    json m{{"schema_version", kSchemaVersion}, {"fingerprint", print},
           {"completed", std::vector<std::string>(completed.begin(), completed.end())}};
    jsonl::write_atomic(manifest_path, m.dump(2) + "\n");
  };
  {
    std::lock_guard lock(manifest_mu);
    write_manifest();
  }

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!restored[i]) pending.push_back(i);
  }
  parallel_for_index(pending.size(), config.workers, [&](std::size_t p) {
    const std::size_t i = pending[p];
    const TaskSpec& task = *task_by_id.at(order[i]);
    lint::LintOptions lopts;
    lopts.input_shape_values = lint::input_shape_values(task.reference_source);
    TaskWork w;
    w.task_id = task.task_id;
    for (const CandidateResponse* r : by_task.at(order[i])) {
      CandidateOutcome o;
      try {
        o = verify_response(task, *r, *judge, &gateway, vopts, lopts);
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        // A candidate that breaks the verifier fails closed; the corpus goes on.
        o = CandidateOutcome{};
        o.verdict.task_id = r->task_id;
        o.verdict.sample_index = r->sample_index;
        if (vopts.ungated) o.verdict.ungated = VerdictRecord::Ungated{};
        o.rejected_at = "error";
        o.detail = e.what();
      }
      if (o.execution && o.execution->error_text) {
        w.runner.push_back({{"task_id", r->task_id}, {"sample_index", r->sample_index},
                            {"error_text", *o.execution->error_text}});
      }
      w.findings.push_back(finding_row(o));
      w.verdicts.push_back(std::move(o.verdict));
    }
    jsonl::write_atomic(work_file(config.out_dir, w.task_id), to_work_json(w).dump() + "\n");
    results[i] = std::move(w);
    std::lock_guard lock(manifest_mu);
    completed.insert(order[i]);
    write_manifest();
  });

  VerifyResult out;
  std::vector<json> findings, runner;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (restored[i]) out.resumed += results[i].verdicts.size();
    for (auto& v : results[i].verdicts) out.verdicts.push_back(std::move(v));
    for (auto& f : results[i].findings) findings.push_back(std::move(f));
    for (auto& r : results[i].runner) runner.push_back(std::move(r));
  }
  std::stable_sort(out.verdicts.begin(), out.verdicts.end(), verdict_order);
  out.executed = gateway.requests_issued();
  for (const auto& v : out.verdicts) {
    if (!v.cascade_ok()) throw Error("internal: verdict for " + v.task_id + " breaks the cascade ordering");
  }
  jsonl::write_atomic(config.out_dir / "verdicts.jsonl", jsonl::dump_records(out.verdicts));
  jsonl::write_atomic(config.out_dir / "findings.jsonl", jsonl::dump(findings));
  jsonl::write_atomic(config.out_dir / "runner.jsonl", jsonl::dump(runner));
  return out;
}

// ----------------------------------------------------------------- reward

std::vector<TokenRecord> load_tokens(const fs::path& path, const std::vector<CandidateResponse>& responses) {
  std::map<std::pair<std::string, std::uint64_t>, const CandidateResponse*> by_key;
  for (const auto& r : responses) by_key[{r.task_id, r.sample_index}] = &r;
  std::vector<TokenRecord> out;
  std::size_t line = 0;
  for (const auto& j : jsonl::read(path)) {
    ++line;
    const std::string where = path.string() + ": record " + std::to_string(line) + ": ";
    try {
      TokenRecord t;
      t.task_id = j.at("task_id").get<std::string>();
      t.sample_index = j.at("sample_index").get<std::uint64_t>();
      t.tokens.ratios = j.at("ratios").get<std::vector<double>>();
      if (auto it = j.find("token_classes"); it != j.end()) {
        for (const auto& c : *it) t.tokens.classes.push_back(token_class_from_string(c.get<std::string>()));
      } else {
        auto rit = by_key.find({t.task_id, t.sample_index});
        if (rit == by_key.end()) throw SchemaError("no response for this token record");
        CandidateResponse r = *rit->second;
        if (!r.token_offsets) throw SchemaError("token_classes absent and response has no token_offsets");
        // A response without a code block still has plan tokens.
        Segmentation seg = segment_response_lenient(r.raw_text);
        r.plan_span = seg.plan;
        r.code_span = seg.code;
        t.tokens.classes = classify_tokens(r);
      }
      if (t.tokens.classes.size() != t.tokens.ratios.size()) throw SchemaError("ratios and token classes differ in length");
      out.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw SchemaError(where + e.what());
    } catch (const Error& e) {
      throw SchemaError(where + e.what());
    }
  }
  return out;
}

std::vector<json> compute_reward_rows(const std::vector<VerdictRecord>& verdicts, const std::vector<TokenRecord>& tokens,
                                      const PipelineConfig& config) {
  std::map<std::pair<std::string, std::uint64_t>, const SampleTokens*> token_index;
  for (const auto& t : tokens) token_index[{t.task_id, t.sample_index}] = &t.tokens;

  std::map<std::string, std::vector<VerdictRecord>> groups;
  for (const auto& v : verdicts) groups[v.task_id].push_back(v);

  std::vector<json> rows;
  for (auto& [task_id, group] : groups) {
    std::sort(group.begin(), group.end(), verdict_order);
    if (config.group_size && group.size() != config.group_size) {
      throw SchemaError("task " + task_id + " has " + std::to_string(group.size()) + " samples, group_size is " +
                        std::to_string(config.group_size));
    }
    if (group.size() < 2) log::warn("task " + task_id + " has a single sample; its advantage is 0");
    RewardBundle b = config.reward_mode == RewardMode::Hierarchical
                         ? hierarchical_rewards(group, config.alpha, config.normalize_std)
                         : uniform_reward(group, config.beta, config.normalize_std);

    std::vector<SampleTokens> samples;
    for (const auto& v : group) {
      auto it = token_index.find({v.task_id, v.sample_index});
      if (it == token_index.end()) break;
      samples.push_back(*it->second);
    }
    const bool have_tokens = samples.size() == group.size();
    HierarchicalObjective hobj;
    UniformObjective uobj;
    if (have_tokens) {
      if (b.mode == RewardMode::Hierarchical) {
        hobj = hierarchical_objective(samples, b, config.alpha, config.epsilon);
        for (const auto& w : hobj.warnings) log::warn("task " + task_id + ": " + w);
      } else {
        uobj = uniform_objective(samples, b, config.epsilon);
        for (const auto& w : uobj.warnings) log::warn("task " + task_id + ": " + w);
      }
    }
    for (std::size_t i = 0; i < group.size(); ++i) {
      json row{{"schema_version", kSchemaVersion},
               {"task_id", task_id},
               {"sample_index", group[i].sample_index},
               {"mode", to_string(b.mode)},
               {"std_normalized", b.std_normalized}};
      if (b.mode == RewardMode::Hierarchical) {
        row["alpha"] = b.alpha;
        row["r_plan"] = b.r_plan[i];
        row["r_code"] = b.r_code[i];
        row["A_plan"] = b.a_plan[i];
        row["A_code"] = b.a_code[i];
        if (have_tokens) {
          row["F_plan"] = hobj.f_plan[i];
          row["F_code"] = hobj.f_code[i];
          row["J"] = hobj.J;
          row["epsilon"] = config.epsilon;
        }
      } else {
        row["beta"] = b.beta;
        row["r"] = b.r[i];
        row["A"] = b.a[i];
        if (have_tokens) {
          row["L"] = uobj.L[i];
          row["J"] = uobj.J;
          row["epsilon"] = config.epsilon;
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// ---------------------------------------------------------------- metrics

std::vector<MetricsSummary> compute_metrics(const std::vector<VerdictRecord>& verdicts, const PipelineConfig& config,
                                            const std::string& label) {
  std::size_t skipped = 0;
  auto tasks = group_by_task(verdicts, true, &skipped);
  EvalOptions o;
  o.unbiased = config.unbiased;
  o.allow_short = config.allow_short || skipped > 0;
  if (skipped > 0) {
    log::warn(std::to_string(skipped) + " sample(s) skipped for lack of a judge verdict; short tasks use what remains");
  }
  std::vector<MetricsSummary> out;
  std::vector<bool> modes{true};
  if (!config.robust) modes.push_back(false);
  for (bool robust : modes) {
    o.robust = robust;
    for (int k : config.k) {
      MetricsSummary s = summarize(tasks, k, config.fast_p, o);
      s.skipped = skipped;
      s.label = label;
      out.push_back(std::move(s));
    }
  }
  return out;
}

json metrics_document(const std::vector<MetricsSummary>& summaries) {
  json arr = json::array();
  for (const auto& s : summaries) arr.push_back(s);
  return json{{"schema_version", kSchemaVersion}, {"summaries", arr}};
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  PipelineResult result;
  result.verify = run_verify(config);
  std::vector<TokenRecord> tokens;
  if (!config.tokens.empty()) tokens = load_tokens(config.tokens, load_responses(config.responses));
  auto rows = compute_reward_rows(result.verify.verdicts, tokens, config);
  jsonl::write_atomic(config.out_dir / "rewards.jsonl", jsonl::dump(rows));
  result.metrics = compute_metrics(result.verify.verdicts, config, config.responses.stem().string());
  jsonl::write_atomic(config.out_dir / "metrics.json", metrics_document(result.metrics).dump(2) + "\n");
  return result;
}

}  // namespace forge
