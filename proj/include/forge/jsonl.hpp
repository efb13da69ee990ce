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

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "forge/error.hpp"

namespace forge::jsonl {

/// Parses one JSON value per non-blank line. Errors carry "path:line".
std::vector<nlohmann::json> read(const std::filesystem::path& path);
std::vector<nlohmann::json> parse(const std::string& text, const std::string& origin);

/// Reads and converts records; conversion failures become SchemaError with
/// the offending line number.
template <class T>
std::vector<T> read_records(const std::filesystem::path& path) {
  std::vector<T> out;
  std::size_t line = 0;
  for (const auto& j : read(path)) {
    ++line;
    try {
      out.push_back(j.get<T>());
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path.string() + ": record " + std::to_string(line) + ": " + e.what());
    } catch (const SchemaError& e) {
      throw SchemaError(path.string() + ": record " + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

std::string dump(const std::vector<nlohmann::json>& rows);

template <class T>
std::string dump_records(const std::vector<T>& records) {
  std::vector<nlohmann::json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.emplace_back(r);
  return dump(rows);
}

/// Writes through a sibling temp file and rename(2), so readers never see a
/// partially written file.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace forge::jsonl
