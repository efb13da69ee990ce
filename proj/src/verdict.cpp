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

#include "forge/verdict.hpp"

#include <cmath>

namespace forge {

namespace {

bool is_bit(int v) { return v == 0 || v == 1; }

}  // namespace

bool VerdictRecord::cascade_ok() const {
  if (!is_bit(syntax) || !is_bit(func) || !is_bit(compiled) || !is_bit(correct)) return false;
  if (!std::isfinite(speedup) || speedup < 0.0) return false;
  if (func > syntax || compiled > func || correct > compiled) return false;
  if (speedup > 0.0 && correct != 1) return false;
  if (ungated) {
    const Ungated& u = *ungated;
    if (!is_bit(u.compiled) || !is_bit(u.correct) || !std::isfinite(u.speedup) || u.speedup < 0.0) return false;
    if (u.compiled > syntax || u.correct > u.compiled || (u.speedup > 0.0 && u.correct != 1)) return false;
    if (compiled > u.compiled || correct > u.correct) return false;
  }
  return true;
}

}  // namespace forge
