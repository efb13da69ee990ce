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

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forge/http.hpp"
#include "forge/metrics.hpp"
#include "forge/response.hpp"

namespace forge {

inline constexpr double kSimplexTolerance = 1e-9;

/// Throws SimplexViolation for an empty p, a negative or non-finite
/// component, or |sum(p) - 1| > tolerance.
void validate_simplex(std::span<const double> p, double tolerance = kSimplexTolerance);

struct MixtureConfig {
  std::vector<double> p;
  /// Difficulty level drawn for each component of p. Level 3 is left out
  /// unless listed here.
  std::vector<int> subset_ids{1, 2};
  std::size_t sample_count = 1000;
  std::uint64_t seed = 0;
};

struct SampledTask {
  std::size_t draw = 0;
  int level = 0;
  std::string task_id;
};

/// i.i.d. draws with replacement: a level from p, then a task uniformly from
/// that level's subset. The sequence depends only on (subsets, config).
/// Throws SimplexViolation, InvalidArgument (p and subset_ids differ in
/// length), EmptySubset (a level with p > 0 has no tasks).
std::vector<SampledTask> sample_mixture(const std::map<int, std::vector<std::string>>& subsets,
                                        const MixtureConfig& config);

struct DifficultyLabel {
  std::string task_id;
  int level = 0;
  std::string labeler;
  std::string raw_reply;
};

void to_json(nlohmann::json& j, const DifficultyLabel& l);
void from_json(const nlohmann::json& j, DifficultyLabel& l);
void to_json(nlohmann::json& j, const SampledTask& t);

/// The single level a labeler reply assigns. Accepts "Level: 2", "level 2",
/// "**Level 2**" or a bare digit; throws UnparseableReply when no level or
/// conflicting levels are found.
int parse_level_reply(std::string_view reply);

/// Distinct compute operations in the reference model's forward path,
/// normalized to lowercase names ("conv2d", "relu", "add", ...).
std::vector<std::string> compute_ops(std::string_view reference_source);

/// 1 op -> level 1, 2 to 4 -> level 2, otherwise 3 (no ops counts as 1).
int level_for_op_count(std::size_t ops);

class Labeler {
 public:
  virtual ~Labeler() = default;
  virtual DifficultyLabel label(const TaskSpec& task) = 0;
  virtual std::string name() const = 0;
};

class StubLabeler final : public Labeler {
 public:
  DifficultyLabel label(const TaskSpec& task) override;
  std::string name() const override { return "stub"; }
};

struct RemoteLabelerConfig {
  std::string url;
  std::string model;
  std::string api_key;
  double temperature = 0.7;
  double top_p = 0.8;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  int max_in_flight = 8;
  double timeout_seconds = 120.0;

  /// FORGE_LABELER_URL / _MODEL / _KEY, each falling back to the judge's
  /// FORGE_JUDGE_* variable.
  static RemoteLabelerConfig from_env();
};

/// Sends the difficulty-labeling prompt as the user message. Transport
/// failures back off and retry, ending in LabelerUnavailable; an
/// unparseable reply is retried once, then UnparseableReply propagates.
class RemoteLabeler final : public Labeler {
 public:
  using Sleep = std::function<void(std::chrono::milliseconds)>;
  explicit RemoteLabeler(RemoteLabelerConfig config, http::PostFn post = {}, Sleep sleep = {});
  DifficultyLabel label(const TaskSpec& task) override;
  std::string name() const override { return "remote:" + config_.model; }

 private:
  RemoteLabelerConfig config_;
  http::PostFn post_;
  Sleep sleep_;
  std::counting_semaphore<1024> slots_;
};

std::unique_ptr<Labeler> make_labeler(std::string_view mode);

/// Which summary figure stands in for R_test of one test subset.
enum class MixtureScoreBy { Correct, MeanSpeedup };

struct MixtureCandidate {
  std::vector<double> p;
  /// Test subset id -> evaluation of the policy trained under p.
  std::map<int, MetricsSummary> per_subset;
};

struct MixtureScore {
  std::size_t index = 0;
  std::vector<double> p;
  double score = 0.0;
};

/// Scores each mixture by the sum over test subsets and ranks descending,
/// lower index first on ties. Throws MissingCell when a mixture lacks one of
/// `test_subsets`.
std::vector<MixtureScore> score_mixture(std::span<const MixtureCandidate> mixtures, std::span<const int> test_subsets,
                                        MixtureScoreBy by = MixtureScoreBy::Correct);

}  // namespace forge
