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

#include "forge/http.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>
#include <regex>

#include "forge/error.hpp"

namespace forge::http {

PostFn make_poster(double timeout_seconds) {
  return [timeout_seconds](const std::string& url, const std::string& body, const Headers& headers) -> Reply {
    static const std::regex url_re(R"(^(https?)://([^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, url_re)) throw ConfigError("malformed endpoint URL: " + url);
    if (m[1] == "https") throw ConfigError("https endpoints need TLS support, which this build omits: " + url);
    httplib::Client client("http://" + m[2].str());
    auto secs = static_cast<time_t>(timeout_seconds);
    auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers hs;
    for (const auto& [k, v] : headers) hs.emplace(k, v);
    std::string path = m[3].matched ? m[3].str() : "/";
    auto res = client.Post(path, hs, body, "application/json");
    if (!res) throw Error("HTTP request to " + url + " failed: " + httplib::to_string(res.error()));
    return Reply{res->status, res->body};
  };
}

std::string chat(const PostFn& post, const ChatRequest& request) {
  nlohmann::json body = {
      {"model", request.model},
      {"temperature", request.temperature},
      {"top_p", request.top_p},
  };
  nlohmann::json messages = nlohmann::json::array();
  if (!request.system.empty()) messages.push_back({{"role", "system"}, {"content", request.system}});
  messages.push_back({{"role", "user"}, {"content", request.user}});
  body["messages"] = std::move(messages);
  if (request.json_mode) body["response_format"] = {{"type", "json_object"}};
  Headers headers;
  if (!request.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + request.api_key);
  Reply reply = post(request.url, body.dump(), headers);
  if (reply.status < 200 || reply.status >= 300) {
    throw Error("endpoint returned HTTP " + std::to_string(reply.status));
  }
  try {
    auto j = nlohmann::json::parse(reply.body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedJudgeReply(std::string("not a chat completion: ") + e.what());
  }
}

}  // namespace forge::http
