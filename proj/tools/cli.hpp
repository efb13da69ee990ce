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

#include <exception>

namespace forge::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kInfrastructure = 2 };

/// 1 for bad input or configuration, 2 for everything else.
int exit_code_for(const std::exception& e);

/// Parses and runs one `forge` invocation.
int run(int argc, char** argv);

}  // namespace forge::cli
