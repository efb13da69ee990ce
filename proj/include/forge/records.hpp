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

#include <nlohmann/json.hpp>

#include "forge/lint.hpp"
#include "forge/response.hpp"
#include "forge/verdict.hpp"

namespace forge {

/// Version stamped into every record this toolkit writes.
inline constexpr int kSchemaVersion = 1;

/// Throws SchemaError unless `j` is an object whose schema_version, when
/// present, is kSchemaVersion.
void check_version(const nlohmann::json& j);

void to_json(nlohmann::json& j, const ByteSpan& s);
void from_json(const nlohmann::json& j, ByteSpan& s);

void to_json(nlohmann::json& j, const TaskSpec& t);
void from_json(const nlohmann::json& j, TaskSpec& t);

/// Responses carry plan_span/code_span only after segmentation; reading
/// a raw response leaves both empty.
void to_json(nlohmann::json& j, const CandidateResponse& r);
void from_json(const nlohmann::json& j, CandidateResponse& r);

void to_json(nlohmann::json& j, const ExecutionReport& r);
void from_json(const nlohmann::json& j, ExecutionReport& r);

void to_json(nlohmann::json& j, const VerdictRecord& v);
void from_json(const nlohmann::json& j, VerdictRecord& v);

}  // namespace forge

namespace forge::lint {

void to_json(nlohmann::json& j, const LintReport& r);

}  // namespace forge::lint
