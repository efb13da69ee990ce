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

#include "forge/gateway.hpp"

#include <cmath>
#include <cstdlib>

#include "forge/error.hpp"
#include "forge/log.hpp"
#include "forge/records.hpp"
#include "subprocess.hpp"

namespace forge {

void to_json(nlohmann::json& j, const RunnerRequest& r) {
  j = nlohmann::json{{"reference_source", r.reference_source},
                     {"candidate_source", r.candidate_source},
                     {"seed", r.seed},
                     {"repetitions", r.repetitions},
                     {"warmups", r.warmups},
                     {"atol", r.atol},
                     {"rtol", r.rtol},
                     {"time", r.time}};
}

void from_json(const nlohmann::json& j, RunnerRequest& r) {
  r.reference_source = j.at("reference_source").get<std::string>();
  r.candidate_source = j.at("candidate_source").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.repetitions = j.at("repetitions").get<int>();
  r.warmups = j.at("warmups").get<int>();
  r.atol = j.at("atol").get<double>();
  r.rtol = j.at("rtol").get<double>();
  r.time = j.at("time").get<bool>();
}

ExecutionReport parse_runner_reply(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw RunnerError(std::string("runner reply is not JSON: ") + e.what());
  }
  ExecutionReport r;
  try {
    r = j.get<ExecutionReport>();
  } catch (const std::exception& e) {
    throw RunnerError(std::string("runner reply has the wrong shape: ") + e.what());
  }
  if (r.outputs_match && !r.compiled) throw RunnerError("runner reply has outputs_match without compiled");
  for (const auto& t : {r.runtime_candidate, r.runtime_reference}) {
    if (t && !(std::isfinite(*t) && *t >= 0.0)) throw RunnerError("runner reply has an invalid runtime");
  }
  if (!r.compiled) {
    r.runtime_candidate.reset();
    r.runtime_reference.reset();
  }
  return r;
}

DevicePool::DevicePool(std::vector<std::string> devices) : free_(devices.begin(), devices.end()), total_(devices.size()) {
  if (devices.empty()) throw ConfigError("at least one device token is required");
}

DevicePool::Lease::~Lease() {
  if (pool_) pool_->release(std::move(device_));
}

DevicePool::Lease DevicePool::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return !free_.empty(); });
  std::string d = std::move(free_.front());
  free_.pop_front();
  return Lease(this, std::move(d));
}

void DevicePool::release(std::string device) {
  {
    std::lock_guard lock(mu_);
    free_.push_back(std::move(device));
  }
  cv_.notify_one();
}

ExecutionGateway::ExecutionGateway(GatewayConfig config)
    : config_(std::move(config)), devices_(config_.devices) {
  if (config_.runner_cmd.empty()) {
    if (const char* env = std::getenv("FORGE_RUNNER_CMD")) config_.runner_cmd = env;
  }
}

ExecutionReport ExecutionGateway::run_candidate(const TaskSpec& task, std::string_view code,
                                                std::optional<double> budget_seconds) {
  if (config_.runner_cmd.empty()) throw ConfigError("no runner command: set FORGE_RUNNER_CMD");
  RunnerRequest req;
  req.reference_source = task.reference_source;
  req.candidate_source = std::string(code);
  req.seed = task.seed;
  req.repetitions = config_.repetitions;
  req.warmups = config_.warmups;
  req.atol = config_.tolerance.atol;
  req.rtol = config_.tolerance.rtol;
  req.time = config_.time;

  detail::ProcessOptions opts;
  opts.timeout_seconds = budget_seconds.value_or(config_.budget_seconds);
  opts.memory_cap_bytes = config_.memory_cap_bytes;

  // Correctness-only runs may share a device; timed runs hold it exclusively.
  std::optional<DevicePool::Lease> lease;
  std::string device = config_.devices.front();
  if (req.time) {
    lease.emplace(devices_.acquire());
    device = lease->device();
  }
  opts.extra_env.emplace_back("FORGE_DEVICE", device);

  ++requests_;
  detail::ProcessResult proc = detail::run_shell(config_.runner_cmd, nlohmann::json(req).dump() + "\n", opts);

  ExecutionReport failed;
  failed.match_tolerance = config_.tolerance;
  failed.device = device;
  if (proc.timed_out) {
    failed.error_text = "timeout";
    return failed;
  }
  std::string_view out = proc.out;
  auto first = out.find_first_not_of(" \t\r\n");
  std::string_view line;
  if (first != std::string_view::npos) {
    line = out.substr(first);
    line = line.substr(0, line.find('\n'));
  }
  if (!line.empty()) {
    try {
      ExecutionReport r = parse_runner_reply(line);
      if (r.device.empty()) r.device = device;
      return r;
    } catch (const RunnerError& e) {
      failed.error_text = std::string(e.what()) + (proc.err.empty() ? "" : "\n" + proc.err);
      return failed;
    }
  }
  std::string why = proc.signaled ? "runner killed by signal " + std::to_string(proc.exit_code)
                                  : "runner exited with status " + std::to_string(proc.exit_code) + " and no reply";
  failed.error_text = proc.err.empty() ? why : why + "\n" + proc.err;
  return failed;
}

int compute_correct(const ExecutionReport& report) { return report.compiled && report.outputs_match ? 1 : 0; }

double compute_speedup(const ExecutionReport& report, int correct) {
  if (!correct) return 0.0;
  if (!report.runtime_candidate || !report.runtime_reference) {
    log::warn("correct report without both runtimes; speedup set to 0");
    return 0.0;
  }
  double ref = *report.runtime_reference;
  double cand = *report.runtime_candidate;
  if (ref < kTimerFloorSeconds || cand < kTimerFloorSeconds) {
    log::warn("ZeroRuntime: runtime below timer resolution, clamped to 1 us");
    ref = std::max(ref, kTimerFloorSeconds);
    cand = std::max(cand, kTimerFloorSeconds);
  }
  return ref / cand;
}

}  // namespace forge
