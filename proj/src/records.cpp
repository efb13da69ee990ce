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

#include "forge/records.hpp"

#include "forge/error.hpp"

namespace forge {

using nlohmann::json;

void check_version(const json& j) {
  if (!j.is_object()) throw SchemaError("expected a JSON object");
  if (auto it = j.find("schema_version"); it != j.end() && *it != kSchemaVersion) {
    throw SchemaError("unsupported schema_version " + it->dump());
  }
}

namespace {

int bit(const json& j, const char* key) {
  const json& v = j.at(key);
  int b = v.is_boolean() ? static_cast<int>(v.get<bool>()) : v.get<int>();
  if (b != 0 && b != 1) throw SchemaError(std::string("field '") + key + "' must be 0 or 1");
  return b;
}

}  // namespace

void to_json(json& j, const ByteSpan& s) { j = json::array({s.begin, s.end}); }

void from_json(const json& j, ByteSpan& s) {
  if (!j.is_array() || j.size() != 2) throw SchemaError("span must be a [begin, end) pair");
  s.begin = j[0].get<std::size_t>();
  s.end = j[1].get<std::size_t>();
  if (s.end < s.begin) throw SchemaError("span end precedes begin");
}

void to_json(json& j, const TaskSpec& t) {
  j = json{{"schema_version", kSchemaVersion},
           {"task_id", t.task_id},
           {"prompt", t.prompt},
           {"reference_source", t.reference_source},
           {"seed", t.seed}};
  j["difficulty"] = t.difficulty ? json(*t.difficulty) : json(nullptr);
}

void from_json(const json& j, TaskSpec& t) {
  check_version(j);
  t.task_id = j.at("task_id").get<std::string>();
  t.prompt = j.value("prompt", std::string());
  t.reference_source = j.at("reference_source").get<std::string>();
  t.seed = j.value("seed", std::uint64_t{0});
  t.difficulty.reset();
  if (auto it = j.find("difficulty"); it != j.end() && !it->is_null()) {
    int d = it->get<int>();
    if (d < 1 || d > 3) throw SchemaError("difficulty must be 1, 2 or 3");
    t.difficulty = d;
  }
}

void to_json(json& j, const CandidateResponse& r) {
  j = json{{"schema_version", kSchemaVersion},
           {"task_id", r.task_id},
           {"sample_index", r.sample_index},
           {"raw_text", r.raw_text},
           {"plan_span", r.plan_span},
           {"code_span", r.code_span}};
  if (r.token_offsets) j["token_offsets"] = *r.token_offsets;
}

void from_json(const json& j, CandidateResponse& r) {
  check_version(j);
  r.task_id = j.at("task_id").get<std::string>();
  r.sample_index = j.at("sample_index").get<std::uint64_t>();
  r.raw_text = j.at("raw_text").get<std::string>();
  r.plan_span = j.value("plan_span", ByteSpan{});
  r.code_span = j.value("code_span", ByteSpan{});
  r.token_offsets.reset();
  if (auto it = j.find("token_offsets"); it != j.end() && !it->is_null()) {
    r.token_offsets = it->get<std::vector<ByteSpan>>();
  }
}

void to_json(json& j, const ExecutionReport& r) {
  j = json{{"compiled", r.compiled},
           {"outputs_match", r.outputs_match},
           {"match_tolerance", {{"atol", r.match_tolerance.atol}, {"rtol", r.match_tolerance.rtol}}},
           {"device", r.device}};
  j["runtime_candidate"] = r.runtime_candidate ? json(*r.runtime_candidate) : json(nullptr);
  j["runtime_reference"] = r.runtime_reference ? json(*r.runtime_reference) : json(nullptr);
  j["error_text"] = r.error_text ? json(*r.error_text) : json(nullptr);
}

void from_json(const json& j, ExecutionReport& r) {
  if (!j.is_object()) throw SchemaError("execution report must be a JSON object");
  r.compiled = j.at("compiled").get<bool>();
  r.outputs_match = j.value("outputs_match", false);
  auto opt_number = [&](const char* key) -> std::optional<double> {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<double>();
  };
  r.runtime_candidate = opt_number("runtime_candidate");
  r.runtime_reference = opt_number("runtime_reference");
  if (auto it = j.find("match_tolerance"); it != j.end() && it->is_object()) {
    r.match_tolerance.atol = it->value("atol", r.match_tolerance.atol);
    r.match_tolerance.rtol = it->value("rtol", r.match_tolerance.rtol);
  }
  r.device = j.value("device", std::string());
  r.error_text.reset();
  if (auto it = j.find("error_text"); it != j.end() && !it->is_null()) r.error_text = it->get<std::string>();
}

void to_json(json& j, const VerdictRecord& v) {
  j = json{{"schema_version", kSchemaVersion},
           {"task_id", v.task_id},
           {"sample_index", v.sample_index},
           {"syntax", v.syntax},
           {"func", v.func},
           {"compiled", v.compiled},
           {"correct", v.correct},
           {"speedup", v.speedup}};
  if (v.judge_unavailable) j["judge_unavailable"] = true;
  if (v.ungated) {
    j["ungated"] = {{"compiled", v.ungated->compiled}, {"correct", v.ungated->correct}, {"speedup", v.ungated->speedup}};
  }
}

void from_json(const json& j, VerdictRecord& v) {
  check_version(j);
  v.task_id = j.at("task_id").get<std::string>();
  v.sample_index = j.at("sample_index").get<std::uint64_t>();
  v.syntax = bit(j, "syntax");
  v.func = bit(j, "func");
  v.compiled = bit(j, "compiled");
  v.correct = bit(j, "correct");
  v.speedup = j.at("speedup").get<double>();
  v.judge_unavailable = j.value("judge_unavailable", false);
  v.ungated.reset();
  if (auto it = j.find("ungated"); it != j.end() && !it->is_null()) {
    VerdictRecord::Ungated u;
    u.compiled = bit(*it, "compiled");
    u.correct = bit(*it, "correct");
    u.speedup = it->at("speedup").get<double>();
    v.ungated = u;
  }
  if (!v.cascade_ok()) throw SchemaError("verdict violates the cascade ordering");
}

}  // namespace forge

namespace forge::lint {

void to_json(nlohmann::json& j, const LintReport& r) {
  using nlohmann::json;
  json launches = json::array();
  for (const auto& l : r.launches_found) {
    launches.push_back({{"kernel", l.kernel}, {"function", l.function}, {"line", l.line},
                        {"resolved", l.resolved}, {"reachable", l.reachable}});
  }
  json forbidden = json::array();
  for (const auto& f : r.forbidden_calls) {
    forbidden.push_back({{"pattern", f.pattern}, {"call", f.call}, {"function", f.function}, {"line", f.line}});
  }
  json dummy = json::array();
  for (const auto& d : r.dummy_kernel_flags) {
    dummy.push_back({{"kernel", d.kernel}, {"reason", d.reason}, {"detail", d.detail}, {"line", d.line}});
  }
  json hard = json::array();
  for (const auto& h : r.hardcode_flags) hard.push_back({{"site", h.site}, {"literal", h.literal}, {"kind", h.kind}});
  j = json{{"syntax_ok", r.syntax_ok},
           {"entry_class", r.entry_class},
           {"kernels_found", r.kernels_found},
           {"launches_found", launches},
           {"forbidden_calls", forbidden},
           {"dummy_kernel_flags", dummy},
           {"hardcode_flags", hard},
           {"func_rule", r.func_rule()},
           {"rule_valid", r.rule_valid()}};
  if (!r.parse_error.empty()) j["parse_error"] = r.parse_error;
}

}  // namespace forge::lint
