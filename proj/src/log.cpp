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

#include "forge/log.hpp"

#include <cstdio>
#include <mutex>

namespace forge::log {

namespace {

std::mutex& mu() {
  static std::mutex m;
  return m;
}

const char* tag(Level level) {
  switch (level) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warning: return "warning";
    case Level::Error: return "error";
  }
  return "?";
}

Sink& sink() {
  static Sink s = [](Level level, std::string_view msg) {
    std::fprintf(stderr, "forge: %s: %.*s\n", tag(level), static_cast<int>(msg.size()), msg.data());
  };
  return s;
}

Level& min_level() {
  static Level l = Level::Warning;
  return l;
}

}  // namespace

Sink set_sink(Sink s) {
  std::lock_guard lock(mu());
  Sink old = std::move(sink());
  sink() = std::move(s);
  return old;
}

void set_min_level(Level level) {
  std::lock_guard lock(mu());
  min_level() = level;
}

void write(Level level, std::string_view message) {
  std::lock_guard lock(mu());
  if (level < min_level() || !sink()) return;
  sink()(level, message);
}

}  // namespace forge::log
