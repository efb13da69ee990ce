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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "forge/response.hpp"
#include "forge/verdict.hpp"

namespace forge {

enum class RewardMode { Hierarchical, Uniform };

const char* to_string(RewardMode mode);

/// Rewards and group-relative advantages for one group of G samples.
/// Hierarchical mode fills the plan/code streams, uniform mode fills r/a.
struct RewardBundle {
  RewardMode mode = RewardMode::Hierarchical;
  double alpha = 0.1;
  double beta = 1.0;
  bool std_normalized = false;
  std::vector<double> r_plan, r_code, a_plan, a_code;
  std::vector<double> r, a;

  std::size_t size() const { return mode == RewardMode::Hierarchical ? r_code.size() : r.size(); }
};

/// A_i = r_i - mean(r); with normalize_std, divided by the population
/// standard deviation (all-equal groups give zeros).
std::vector<double> group_advantages(std::span<const double> rewards, bool normalize_std = false);

/// r_plan = syntax*func*speedup, r_code = syntax*func*correct.
/// Throws EmptyGroup.
RewardBundle hierarchical_rewards(std::span<const VerdictRecord> group, double alpha = 0.1,
                                  bool normalize_std = false);

/// r = syntax*func*(beta*correct + (1-beta)*speedup).
/// Throws EmptyGroup, BetaOutOfRange.
RewardBundle uniform_reward(std::span<const VerdictRecord> group, double beta, bool normalize_std = false);

/// min(ratio*A, clip(ratio, 1-eps, 1+eps)*A).
double clipped_surrogate(double ratio, double advantage, double epsilon);

/// Per-token probability ratios and classes of one sampled response.
struct SampleTokens {
  std::vector<double> ratios;
  std::vector<TokenClass> classes;

  std::size_t count(TokenClass cls) const;
};

struct HierarchicalObjective {
  double J = 0.0;
  std::vector<double> f_plan;
  std::vector<double> f_code;
  std::vector<std::string> warnings;
};

struct UniformObjective {
  double J = 0.0;
  std::vector<double> L;
  std::vector<std::string> warnings;
};

/// J = (1/G) sum_i (alpha*F_plan,i + F_code,i), where F_class,i is the mean
/// clipped surrogate over that class's tokens with that class's advantage.
/// `other` tokens are ignored; an empty class contributes 0 and a warning.
/// Throws InvalidArgument on shape mismatches or bad ratios.
HierarchicalObjective hierarchical_objective(std::span<const SampleTokens> group, const RewardBundle& bundle,
                                             double alpha, double epsilon);

/// One advantage per sample averaged over its plan and code tokens.
UniformObjective uniform_objective(std::span<const SampleTokens> group, const RewardBundle& bundle,
                                   double epsilon);

/// A group ready for objective evaluation.
struct TokenGroup {
  std::vector<SampleTokens> samples;
  RewardBundle bundle;
};

/// Evaluates many groups; OpenMP parallel over groups. Each group is reduced
/// serially in sample order, so results equal the serial variant bit for bit.
std::vector<HierarchicalObjective> hierarchical_objective_batch(std::span<const TokenGroup> groups, double alpha,
                                                                double epsilon);
std::vector<HierarchicalObjective> hierarchical_objective_batch_serial(std::span<const TokenGroup> groups,
                                                                       double alpha, double epsilon);
std::vector<UniformObjective> uniform_objective_batch(std::span<const TokenGroup> groups, double epsilon);
std::vector<UniformObjective> uniform_objective_batch_serial(std::span<const TokenGroup> groups, double epsilon);

}  // namespace forge
