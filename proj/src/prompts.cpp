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

#include "forge/prompts.hpp"

namespace forge::prompts {

std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = values.find(std::string(tmpl.substr(i + 1, close - i - 1)));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

std::string difficulty_label(std::string_view reference_source) {
  return fill(difficulty_label_template(), {{"reference_source", std::string(reference_source)}});
}

std::string kernelbook_instruction(std::string_view reference_source) {
  return fill(kernelbook_instruction_template(), {{"reference_source", std::string(reference_source)}});
}

std::string kernelbench_one_shot(std::string_view reference_source) {
  auto strip = [](std::string_view s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.remove_suffix(1);
    return std::string(s);
  };
  return fill(kernelbench_one_shot_template(), {{"example_reference", strip(one_shot_example_reference())},
                                                {"example_kernel", strip(one_shot_example_kernel())},
                                                {"reference_source", std::string(reference_source)}});
}

}  // namespace forge::prompts
