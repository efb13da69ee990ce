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

#include <map>
#include <string>
#include <string_view>

namespace forge::prompts {

// Prompt templates shipped under share/prompts and compiled in. Placeholders
// are written {name}.

std::string_view difficulty_label_template();
std::string_view kernelbook_instruction_template();
std::string_view kernelbench_one_shot_template();
std::string_view one_shot_example_reference();
std::string_view one_shot_example_kernel();

/// Substitutes {key} placeholders of the template in one pass. Braces that
/// do not name a key are copied through.
std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& values);

std::string difficulty_label(std::string_view reference_source);
std::string kernelbook_instruction(std::string_view reference_source);
/// One-shot prompt with the built-in elementwise-add example pair.
std::string kernelbench_one_shot(std::string_view reference_source);

}  // namespace forge::prompts
