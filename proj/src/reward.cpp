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

#include "forge/reward.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "forge/error.hpp"

namespace forge {

namespace {

double gate(const VerdictRecord& v) { return v.syntax == 1 && v.func == 1 ? 1.0 : 0.0; }

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");
}

void check_sample(const SampleTokens& s, std::size_t i) {
  if (s.ratios.size() != s.classes.size()) {
    throw InvalidArgument("sample " + std::to_string(i) + ": ratio and class counts differ");
  }
  for (double r : s.ratios) {
    if (!(std::isfinite(r) && r > 0.0)) {
      throw InvalidArgument("sample " + std::to_string(i) + ": ratios must be finite and positive");
    }
  }
}

template <class Pred>
double class_mean(const SampleTokens& s, double advantage, double epsilon, Pred in_class, std::size_t& count) {
  double sum = 0.0;
  count = 0;
  for (std::size_t t = 0; t < s.ratios.size(); ++t) {
    if (!in_class(s.classes[t])) continue;
    sum += clipped_surrogate(s.ratios[t], advantage, epsilon);
    ++count;
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

template <class Result, class Fn>
std::vector<Result> parallel_map(std::span<const TokenGroup> groups, Fn fn) {
  std::vector<Result> out(groups.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::ptrdiff_t>(groups.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = fn(groups[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical(forge_reward_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace

const char* to_string(RewardMode mode) { return mode == RewardMode::Hierarchical ? "hierarchical" : "uniform"; }

std::vector<double> group_advantages(std::span<const double> rewards, bool normalize_std) {
  if (rewards.empty()) throw EmptyGroup("group has no samples");
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(rewards.size());
  std::vector<double> a;
  a.reserve(rewards.size());
  for (double r : rewards) a.push_back(r - mean);
  if (normalize_std) {
    double var = 0.0;
    for (double x : a) var += x * x;
    double sd = std::sqrt(var / static_cast<double>(a.size()));
    for (double& x : a) x = sd > 0.0 ? x / sd : 0.0;
  }
  return a;
}

RewardBundle hierarchical_rewards(std::span<const VerdictRecord> group, double alpha, bool normalize_std) {
  if (group.empty()) throw EmptyGroup("group has no samples");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  RewardBundle b;
  b.mode = RewardMode::Hierarchical;
  b.alpha = alpha;
  b.std_normalized = normalize_std;
  for (const auto& v : group) {
    const bool ok = gate(v) == 1.0;
    b.r_plan.push_back(ok ? v.speedup : 0.0);
    b.r_code.push_back(ok ? static_cast<double>(v.correct) : 0.0);
  }
  b.a_plan = group_advantages(b.r_plan, normalize_std);
  b.a_code = group_advantages(b.r_code, normalize_std);
  return b;
}

RewardBundle uniform_reward(std::span<const VerdictRecord> group, double beta, bool normalize_std) {
  if (group.empty()) throw EmptyGroup("group has no samples");
  if (!(beta >= 0.0 && beta <= 1.0)) throw BetaOutOfRange("beta must lie in [0, 1]");
  RewardBundle b;
  b.mode = RewardMode::Uniform;
  b.beta = beta;
  b.std_normalized = normalize_std;
  for (const auto& v : group) {
    const bool ok = gate(v) == 1.0;
    b.r.push_back(ok ? beta * static_cast<double>(v.correct) + (1.0 - beta) * v.speedup : 0.0);
  }
  b.a = group_advantages(b.r, normalize_std);
  return b;
}

double clipped_surrogate(double ratio, double advantage, double epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

std::size_t SampleTokens::count(TokenClass cls) const {
  return static_cast<std::size_t>(std::count(classes.begin(), classes.end(), cls));
}

HierarchicalObjective hierarchical_objective(std::span<const SampleTokens> group, const RewardBundle& bundle,
                                             double alpha, double epsilon) {
  if (group.empty()) throw EmptyGroup("group has no samples");
  if (bundle.mode != RewardMode::Hierarchical) throw InvalidArgument("hierarchical objective needs a hierarchical bundle");
  if (bundle.size() != group.size() || bundle.a_plan.size() != group.size()) {
    throw InvalidArgument("bundle and token group sizes differ");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  check_epsilon(epsilon);

  HierarchicalObjective out;
  double total = 0.0;
  for (std::size_t i = 0; i < group.size(); ++i) {
    const SampleTokens& s = group[i];
    check_sample(s, i);
    std::size_t n_plan = 0, n_code = 0;
    double f_plan = class_mean(s, bundle.a_plan[i], epsilon, [](TokenClass c) { return c == TokenClass::Plan; }, n_plan);
    double f_code = class_mean(s, bundle.a_code[i], epsilon, [](TokenClass c) { return c == TokenClass::Code; }, n_code);
    if (n_plan == 0) out.warnings.push_back("sample " + std::to_string(i) + ": no plan tokens, F_plan = 0");
    if (n_code == 0) out.warnings.push_back("sample " + std::to_string(i) + ": no code tokens, F_code = 0");
    out.f_plan.push_back(f_plan);
    out.f_code.push_back(f_code);
    total += alpha * f_plan + f_code;
  }
  out.J = total / static_cast<double>(group.size());
  return out;
}

UniformObjective uniform_objective(std::span<const SampleTokens> group, const RewardBundle& bundle, double epsilon) {
  if (group.empty()) throw EmptyGroup("group has no samples");
  if (bundle.mode != RewardMode::Uniform) throw InvalidArgument("uniform objective needs a uniform bundle");
  if (bundle.a.size() != group.size()) throw InvalidArgument("bundle and token group sizes differ");
  check_epsilon(epsilon);

  UniformObjective out;
  double total = 0.0;
  for (std::size_t i = 0; i < group.size(); ++i) {
    const SampleTokens& s = group[i];
    check_sample(s, i);
    std::size_t n = 0;
    double l = class_mean(s, bundle.a[i], epsilon, [](TokenClass c) { return c != TokenClass::Other; }, n);
    if (n == 0) out.warnings.push_back("sample " + std::to_string(i) + ": no plan or code tokens, L = 0");
    out.L.push_back(l);
    total += l;
  }
  out.J = total / static_cast<double>(group.size());
  return out;
}

std::vector<HierarchicalObjective> hierarchical_objective_batch(std::span<const TokenGroup> groups, double alpha,
                                                                double epsilon) {
  return parallel_map<HierarchicalObjective>(
      groups, [&](const TokenGroup& g) { return hierarchical_objective(g.samples, g.bundle, alpha, epsilon); });
}

std::vector<HierarchicalObjective> hierarchical_objective_batch_serial(std::span<const TokenGroup> groups,
                                                                       double alpha, double epsilon) {
  std::vector<HierarchicalObjective> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(hierarchical_objective(g.samples, g.bundle, alpha, epsilon));
  return out;
}

std::vector<UniformObjective> uniform_objective_batch(std::span<const TokenGroup> groups, double epsilon) {
  return parallel_map<UniformObjective>(groups,
                                        [&](const TokenGroup& g) { return uniform_objective(g.samples, g.bundle, epsilon); });
}

std::vector<UniformObjective> uniform_objective_batch_serial(std::span<const TokenGroup> groups, double epsilon) {
  std::vector<UniformObjective> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(uniform_objective(g.samples, g.bundle, epsilon));
  return out;
}

}  // namespace forge
