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

#include <stdexcept>
#include <string>

namespace forge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define FORGE_DEFINE_ERROR(Name)       \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  };

// response parsing
FORGE_DEFINE_ERROR(NoCodeBlock)
// judge / labeler transport
FORGE_DEFINE_ERROR(JudgeUnavailable)
FORGE_DEFINE_ERROR(MalformedJudgeReply)
FORGE_DEFINE_ERROR(LabelerUnavailable)
FORGE_DEFINE_ERROR(UnparseableReply)
// reward engine
FORGE_DEFINE_ERROR(EmptyGroup)
FORGE_DEFINE_ERROR(BetaOutOfRange)
FORGE_DEFINE_ERROR(InvalidArgument)
// metrics
FORGE_DEFINE_ERROR(InsufficientSamples)
// data mixing
FORGE_DEFINE_ERROR(SimplexViolation)
FORGE_DEFINE_ERROR(EmptySubset)
FORGE_DEFINE_ERROR(MissingCell)
// corpus / config ingestion
FORGE_DEFINE_ERROR(SchemaError)
FORGE_DEFINE_ERROR(ConfigError)
// execution
FORGE_DEFINE_ERROR(RunnerError)

#undef FORGE_DEFINE_ERROR

}  // namespace forge
