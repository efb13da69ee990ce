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

#include <string_view>

#include "forge/python/ast.hpp"

namespace forge::python {

/// Parses Python 3 source into a Module. Throws ParseError on any lexical
/// or grammatical error, including invalid assignment targets.
Module parse(std::string_view source);

/// Non-throwing convenience: true iff `parse` succeeds.
bool parses(std::string_view source);

}  // namespace forge::python
