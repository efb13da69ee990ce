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

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace forge::http {

struct Reply {
  int status = 0;
  std::string body;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

/// POST a JSON body. Throws forge::Error on connection failure; HTTP error
/// statuses are returned, not thrown.
using PostFn = std::function<Reply(const std::string& url, const std::string& body, const Headers& headers)>;

/// Plain-HTTP poster. https URLs are rejected with ConfigError.
PostFn make_poster(double timeout_seconds);

/// Sends an OpenAI-style chat completion request and returns the first
/// choice's message content. Throws forge::Error on transport failure or a
/// non-2xx status, and MalformedJudgeReply when the envelope is not a chat
/// completion.
struct ChatRequest {
  std::string url;
  std::string model;
  std::string api_key;
  std::string system;
  std::string user;
  double temperature = 0.0;
  double top_p = 1.0;
  bool json_mode = false;
};
std::string chat(const PostFn& post, const ChatRequest& request);

}  // namespace forge::http
