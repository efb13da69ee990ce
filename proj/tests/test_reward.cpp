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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "forge/error.hpp"
#include "forge/reward.hpp"
#include "oracles.hpp"

using namespace forge;

namespace {

VerdictRecord v(int s, int f, int c, int k, double sp) {
  VerdictRecord r;
  r.syntax = s;
  r.func = f;
  r.compiled = c;
  r.correct = k;
  r.speedup = sp;
  return r;
}

SampleTokens tokens(std::vector<double> ratios, std::vector<TokenClass> classes) {
  return SampleTokens{std::move(ratios), std::move(classes)};
}

struct Instance {
  std::vector<VerdictRecord> verdicts;
  std::vector<oracle::Sample> samples;
  std::vector<SampleTokens> engine;
};

Instance random_instance(std::mt19937_64& rng) {
  Instance in;
  std::uniform_int_distribution<int> g(1, 8), len(0, 32), cls(0, 2);
  std::uniform_real_distribution<double> ratio(0.2, 5.0);
  int G = g(rng);
  for (int i = 0; i < G; ++i) {
    in.verdicts.push_back(oracle::random_verdict(rng, "t", static_cast<std::uint64_t>(i)));
    oracle::Sample s;
    SampleTokens e;
    int n = len(rng);
    for (int t = 0; t < n; ++t) {
      auto c = static_cast<TokenClass>(cls(rng));
      double r = ratio(rng);
      s.push_back({r, c});
      e.ratios.push_back(r);
      e.classes.push_back(c);
    }
    in.samples.push_back(s);
    in.engine.push_back(e);
  }
  return in;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Rewards, HierarchicalExample) {
  std::vector<VerdictRecord> g{v(1, 1, 1, 1, 2.0), v(1, 1, 1, 0, 0.0)};
  auto b = hierarchical_rewards(g);
  EXPECT_EQ(b.r_plan, (std::vector<double>{2.0, 0.0}));
  EXPECT_EQ(b.a_plan, (std::vector<double>{1.0, -1.0}));
  EXPECT_EQ(b.r_code, (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(b.a_code, (std::vector<double>{0.5, -0.5}));
  EXPECT_EQ(b.alpha, 0.1);
}

TEST(Rewards, SyntaxFailureZeroesEverything) {
  // A record can only reach here with all bits zero, but the gate must hold
  // even if execution fields were filled by hand.
  VerdictRecord bad = v(0, 0, 1, 1, 3.0);
  auto b = hierarchical_rewards(std::vector<VerdictRecord>{bad, v(1, 1, 1, 1, 1.0)});
  EXPECT_EQ(b.r_plan[0], 0.0);
  EXPECT_EQ(b.r_code[0], 0.0);
  auto u = uniform_reward(std::vector<VerdictRecord>{bad}, 0.5);
  EXPECT_EQ(u.r[0], 0.0);
}

TEST(Rewards, IdenticalGroupHasZeroAdvantage) {
  std::vector<VerdictRecord> g(3, v(1, 1, 1, 1, 1.5));
  auto b = hierarchical_rewards(g);
  for (double a : b.a_plan) EXPECT_EQ(a, 0.0);
  for (double a : b.a_code) EXPECT_EQ(a, 0.0);
  auto n = hierarchical_rewards(g, 0.1, true);
  for (double a : n.a_plan) EXPECT_EQ(a, 0.0);
}

TEST(Rewards, UniformExamples) {
  EXPECT_EQ(uniform_reward(std::vector<VerdictRecord>{v(1, 1, 1, 1, 0.7)}, 1.0).r[0], 1.0);
  EXPECT_EQ(uniform_reward(std::vector<VerdictRecord>{v(1, 1, 1, 1, 0.5)}, 0.0).r[0], 0.5);
  EXPECT_EQ(uniform_reward(std::vector<VerdictRecord>{v(1, 1, 1, 1, 2.0)}, 0.5).r[0], 1.5);
  EXPECT_THROW(uniform_reward(std::vector<VerdictRecord>{v(1, 1, 1, 1, 2.0)}, 1.5), BetaOutOfRange);
  EXPECT_THROW(uniform_reward(std::vector<VerdictRecord>{}, 0.5), EmptyGroup);
  EXPECT_THROW(hierarchical_rewards(std::vector<VerdictRecord>{}), EmptyGroup);
}

TEST(Rewards, StdNormalization) {
  auto a = group_advantages(std::vector<double>{0.0, 2.0}, true);
  EXPECT_DOUBLE_EQ(a[0], -1.0);
  EXPECT_DOUBLE_EQ(a[1], 1.0);
}

TEST(Surrogate, Examples) {
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.3, 1.0, 0.2), 1.2);
  EXPECT_DOUBLE_EQ(clipped_surrogate(0.5, -1.0, 0.2), -0.8);
  EXPECT_DOUBLE_EQ(clipped_surrogate(1.0, -3.5, 0.2), -3.5);
}

TEST(Surrogate, MinProperty) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> r(0.01, 10.0), a(-5.0, 5.0), e(0.01, 0.99);
  for (int i = 0; i < 10000; ++i) {
    double ratio = r(rng), adv = a(rng), eps = e(rng);
    double s = clipped_surrogate(ratio, adv, eps);
    EXPECT_LE(s, ratio * adv);
    EXPECT_LE(s, std::clamp(ratio, 1 - eps, 1 + eps) * adv);
  }
}

TEST(Objective, SymmetricTwoSampleGroup) {
  std::vector<VerdictRecord> g{v(1, 1, 1, 1, 1.0), v(1, 1, 0, 0, 0.0)};
  auto b = hierarchical_rewards(g);
  std::vector<SampleTokens> t{tokens({1, 1, 1}, {TokenClass::Plan, TokenClass::Code, TokenClass::Code}),
                              tokens({1, 1}, {TokenClass::Plan, TokenClass::Code})};
  auto o = hierarchical_objective(t, b, 0.1, 0.2);
  EXPECT_EQ(o.f_plan, (std::vector<double>{0.5, -0.5}));
  EXPECT_EQ(o.f_code, (std::vector<double>{0.5, -0.5}));
  EXPECT_DOUBLE_EQ(o.J, 0.0);
  EXPECT_TRUE(o.warnings.empty());
}

TEST(Objective, MissingPlanWarns) {
  std::vector<VerdictRecord> g{v(1, 1, 1, 1, 1.0), v(0, 0, 0, 0, 0)};
  auto b = hierarchical_rewards(g);
  std::vector<SampleTokens> t{tokens({1.1}, {TokenClass::Code}), tokens({0.9}, {TokenClass::Other})};
  auto o = hierarchical_objective(t, b, 0.1, 0.2);
  EXPECT_EQ(o.f_plan[0], 0.0);
  EXPECT_EQ(o.warnings.size(), 3u);
}

TEST(Objective, OtherTokensIgnored) {
  std::vector<VerdictRecord> g{v(1, 1, 1, 1, 2.0), v(1, 1, 0, 0, 0)};
  auto b = hierarchical_rewards(g);
  std::vector<SampleTokens> base{tokens({1.5, 0.7}, {TokenClass::Plan, TokenClass::Code}),
                                 tokens({0.9, 1.1}, {TokenClass::Plan, TokenClass::Code})};
  auto with_other = base;
  with_other[0].ratios.push_back(4.0);
  with_other[0].classes.push_back(TokenClass::Other);
  EXPECT_EQ(hierarchical_objective(base, b, 0.3, 0.2).J, hierarchical_objective(with_other, b, 0.3, 0.2).J);
}

TEST(Objective, RejectsBadInput) {
  std::vector<VerdictRecord> g{v(1, 1, 1, 1, 2.0)};
  auto b = hierarchical_rewards(g);
  EXPECT_THROW(hierarchical_objective(std::vector<SampleTokens>{tokens({-1.0}, {TokenClass::Code})}, b, 0.1, 0.2),
               InvalidArgument);
  EXPECT_THROW(hierarchical_objective(std::vector<SampleTokens>{tokens({1.0}, {})}, b, 0.1, 0.2), InvalidArgument);
  EXPECT_THROW(hierarchical_objective(std::vector<SampleTokens>{tokens({1.0}, {TokenClass::Code})}, b, 0.1, 1.5),
               InvalidArgument);
  EXPECT_THROW(uniform_objective(std::vector<SampleTokens>{tokens({1.0}, {TokenClass::Code})}, b, 0.2),
               InvalidArgument);
}

TEST(Objective, UniformSingleSampleZeroAdvantage) {
  auto b = uniform_reward(std::vector<VerdictRecord>{v(1, 1, 1, 1, 1.0)}, 0.5);
  auto o = uniform_objective(std::vector<SampleTokens>{tokens({1, 1, 1}, {TokenClass::Plan, TokenClass::Code,
                                                                           TokenClass::Other})},
                             b, 0.2);
  EXPECT_EQ(o.J, 0.0);
}

TEST(Objective, MatchesOracle) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int trial = 0; trial < 300; ++trial) {
    Instance in = random_instance(rng);
    double alpha = unit(rng), beta = unit(rng), eps = 0.05 + 0.9 * unit(rng);
    auto hb = hierarchical_rewards(in.verdicts, alpha);
    auto h = hierarchical_objective(in.engine, hb, alpha, eps);
    double want = oracle::hierarchical_J(in.samples, oracle::centered(oracle::plan_rewards(in.verdicts)),
                                         oracle::centered(oracle::code_rewards(in.verdicts)), alpha, eps);
    EXPECT_LE(rel_err(h.J, want), 1e-9) << trial;
    auto ub = uniform_reward(in.verdicts, beta);
    auto u = uniform_objective(in.engine, ub, eps);
    double uwant = oracle::uniform_J(in.samples, oracle::centered(oracle::uniform_rewards(in.verdicts, beta)), eps);
    EXPECT_LE(rel_err(u.J, uwant), 1e-9) << trial;
  }
}

TEST(Objective, PermutationInvariant) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    Instance in = random_instance(rng);
    auto b = hierarchical_rewards(in.verdicts);
    double j = hierarchical_objective(in.engine, b, 0.1, 0.2).J;
    std::vector<std::size_t> perm(in.verdicts.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<VerdictRecord> pv;
    std::vector<SampleTokens> pt;
    for (auto i : perm) {
      pv.push_back(in.verdicts[i]);
      pt.push_back(in.engine[i]);
    }
    double pj = hierarchical_objective(pt, hierarchical_rewards(pv), 0.1, 0.2).J;
    EXPECT_NEAR(j, pj, 1e-12);
  }
}

TEST(Objective, ScalesWithRewards) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    Instance in = random_instance(rng);
    auto b = hierarchical_rewards(in.verdicts);
    auto scaled = b;
    const double c = 3.0;
    for (auto* vec : {&scaled.r_plan, &scaled.r_code}) {
      for (double& x : *vec) x *= c;
    }
    scaled.a_plan = group_advantages(scaled.r_plan);
    scaled.a_code = group_advantages(scaled.r_code);
    for (std::size_t i = 0; i < b.a_plan.size(); ++i) EXPECT_NEAR(scaled.a_plan[i], c * b.a_plan[i], 1e-12);
    double j = hierarchical_objective(in.engine, b, 0.4, 0.2).J;
    double js = hierarchical_objective(in.engine, scaled, 0.4, 0.2).J;
    EXPECT_NEAR(js, c * j, 1e-9 * std::max(1.0, std::abs(js)));
  }
}

TEST(Objective, AdvantagesSumToZero) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    Instance in = random_instance(rng);
    auto b = hierarchical_rewards(in.verdicts);
    double sp = 0, sc = 0;
    for (double a : b.a_plan) sp += a;
    for (double a : b.a_code) sc += a;
    EXPECT_LT(std::abs(sp), 1e-12);
    EXPECT_LT(std::abs(sc), 1e-12);
  }
}

TEST(Objective, AlphaZeroIsCodeOnly) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    Instance in = random_instance(rng);
    auto b = hierarchical_rewards(in.verdicts, 0.0);
    auto o = hierarchical_objective(in.engine, b, 0.0, 0.2);
    double code_only = 0;
    for (double f : o.f_code) code_only += f;
    code_only /= static_cast<double>(o.f_code.size());
    EXPECT_EQ(o.J, code_only);
  }
}

TEST(Objective, AlphaOneMergedEqualsUniform) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    Instance in = random_instance(rng);
    auto ub = uniform_reward(in.verdicts, 0.5);
    RewardBundle hb;
    hb.mode = RewardMode::Hierarchical;
    hb.alpha = 1.0;
    hb.r_plan = hb.r_code = ub.r;
    hb.a_plan = hb.a_code = ub.a;
    auto merged = in.engine;
    for (auto& s : merged) {
      for (auto& c : s.classes) {
        if (c != TokenClass::Other) c = TokenClass::Plan;
      }
    }
    double hj = hierarchical_objective(merged, hb, 1.0, 0.2).J;
    double uj = uniform_objective(in.engine, ub, 0.2).J;
    EXPECT_NEAR(hj, uj, 1e-12);
  }
}

TEST(Objective, BatchMatchesSerial) {
  std::mt19937_64 rng(19);
  std::vector<TokenGroup> hier, uni;
  for (int i = 0; i < 200; ++i) {
    Instance in = random_instance(rng);
    hier.push_back({in.engine, hierarchical_rewards(in.verdicts)});
    uni.push_back({in.engine, uniform_reward(in.verdicts, 0.3)});
  }
  auto a = hierarchical_objective_batch(hier, 0.1, 0.2);
  auto b = hierarchical_objective_batch_serial(hier, 0.1, 0.2);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].J, b[i].J);
  auto c = uniform_objective_batch(uni, 0.2);
  auto d = uniform_objective_batch_serial(uni, 0.2);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(c[i].J, d[i].J);
}
