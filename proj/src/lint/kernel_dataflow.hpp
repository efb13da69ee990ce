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

#include <vector>

#include "forge/lint.hpp"
#include "module_index.hpp"

namespace forge::lint {

struct KernelDataflow {
  std::vector<KernelFlag> dummy_flags;
  std::vector<HardcodeFlag> hardcode_flags;
};

/// Flow-insensitive value tracking inside one kernel body: which values are
/// raw loads, which are arithmetic over loaded data, and what gets stored.
KernelDataflow analyze_kernel(const ModuleIndex& index, const std::string& name, const python::Stmt& kernel,
                              const std::vector<std::int64_t>& shape_values);

}  // namespace forge::lint
