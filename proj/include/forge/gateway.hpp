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

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "forge/response.hpp"
#include "forge/verdict.hpp"

namespace forge {

/// One line of the runner wire protocol.
struct RunnerRequest {
  std::string reference_source;
  std::string candidate_source;
  std::uint64_t seed = 0;
  int repetitions = 20;
  int warmups = 3;
  double atol = 1e-2;
  double rtol = 1e-2;
  bool time = true;
};

void to_json(nlohmann::json& j, const RunnerRequest& r);
void from_json(const nlohmann::json& j, RunnerRequest& r);

/// Decodes one reply line. Replies that break the report invariants
/// (outputs_match without compiled, non-positive runtimes) are rejected
/// with RunnerError.
ExecutionReport parse_runner_reply(std::string_view line);

/// Hands out device names so that at most one timed run holds a device.
class DevicePool {
 public:
  explicit DevicePool(std::vector<std::string> devices);

  class Lease {
   public:
    Lease(DevicePool* pool, std::string device) : pool_(pool), device_(std::move(device)) {}
    Lease(Lease&& other) noexcept : pool_(other.pool_), device_(std::move(other.device_)) { other.pool_ = nullptr; }
    Lease(const Lease&) = delete;
    Lease& operator=(const Lease&) = delete;
    Lease& operator=(Lease&&) = delete;
    ~Lease();
    const std::string& device() const { return device_; }

   private:
    DevicePool* pool_;
    std::string device_;
  };

  Lease acquire();
  std::size_t size() const { return total_; }

 private:
  void release(std::string device);

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> free_;
  std::size_t total_;
};

struct GatewayConfig {
  std::string runner_cmd;  // FORGE_RUNNER_CMD when empty
  double budget_seconds = 120.0;
  int repetitions = 20;
  int warmups = 3;
  Tolerance tolerance;
  std::vector<std::string> devices{"cuda:0"};
  std::uint64_t memory_cap_bytes = std::uint64_t{8} << 30;
  bool time = true;
};

/// Drives the external kernel runner: one fresh process per candidate, a
/// wall-clock budget, and per-device serialization of timed runs. The
/// device name reaches the runner as FORGE_DEVICE.
class ExecutionGateway {
 public:
  explicit ExecutionGateway(GatewayConfig config);

  /// Never throws for candidate-level failures: timeouts give
  /// compiled=false with error_text "timeout", crashes give compiled=false
  /// with the runner's stderr.
  ExecutionReport run_candidate(const TaskSpec& task, std::string_view code,
                                std::optional<double> budget_seconds = std::nullopt);

  std::size_t requests_issued() const { return requests_.load(); }
  const GatewayConfig& config() const { return config_; }

 private:
  GatewayConfig config_;
  DevicePool devices_;
  std::atomic<std::size_t> requests_{0};
};

/// compiled AND outputs_match.
int compute_correct(const ExecutionReport& report);

/// Runtimes below this are clamped before taking the ratio.
inline constexpr double kTimerFloorSeconds = 1e-6;

/// runtime_reference / runtime_candidate when correct, else 0. A runtime
/// under 1 µs is clamped to 1 µs with a warning. A correct report missing
/// a runtime yields 0 with a warning.
double compute_speedup(const ExecutionReport& report, int correct);

}  // namespace forge
