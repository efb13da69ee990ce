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

#include <optional>
#include <string>
#include <string_view>

namespace forge::lint {

// Forbidden-call catalog. Each matcher takes an alias-resolved dotted path
// and returns the catalog pattern it hit.

/// torch.matmul/mm/bmm/einsum/addmm/baddbmm/addbmm/mv, torch.conv*,
/// torch.nn.functional compute ops, torch.ops.aten matmul/conv, and
/// anything under an `extern_kernels` namespace.
std::optional<std::string> match_forbidden_function(std::string_view path);

/// Stateful compute submodules: nn.Conv*, nn.Linear, nn.*Norm*,
/// nn.MultiheadAttention. Returns "nn.<Class>".
std::optional<std::string> match_forbidden_module(std::string_view constructor_path);

/// Matmul-family methods on runtime tensors (x.matmul(y), x.bmm(y), ...).
std::optional<std::string> match_tensor_method(std::string_view method);

bool is_container_module(std::string_view constructor_path);

}  // namespace forge::lint
