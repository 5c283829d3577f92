// Copyright 2026 The R2B2 Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "r2b2/acquisition.h"
#include "r2b2/errors.h"
#include "r2b2/reasoning.h"
#include "test_util.h"

namespace r2b2 {
namespace {

using testing::Incremental;
using testing::RandomHistory;
using testing::RandomStrategy;
using testing::TwoAgentGrid;

// Brute-force oracles: every UCB value comes from a scalar Predict call.

double UcbAt(const GpPosterior& gp, const JointSpace& joint,
             const std::vector<ActionIndex>& actions, double beta) {
  const Eigen::VectorXd z = joint.Point(actions);
  return Ucb(gp, {z.data(), static_cast<std::size_t>(z.size())}, beta);
}

ActionIndex FirstMax(const std::vector<double>& v) {
  ActionIndex best = 0;
  for (ActionIndex i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

std::vector<double> ExpectedOracle(const GpPosterior& gp, const JointSpace& joint,
                                   std::size_t self,
                                   const std::vector<const MixedStrategy*>& others,
                                   const std::vector<int>& fixed, double beta) {
  // Enumerates every joint action; agents with fixed[a] >= 0 are held there.
  const std::size_t m = joint.num_agents();
  std::vector<double> out(joint.agent(self).size(), 0.0);
  std::vector<ActionIndex> a(m, 0);
  for (std::size_t flat = 0; flat < joint.size(); ++flat) {
    a = joint.Unflatten(flat);
    double w = 1.0;
    for (std::size_t j = 0; j < m && w > 0.0; ++j) {
      if (j == self) continue;
      if (fixed[j] >= 0) {
        w *= a[j] == static_cast<ActionIndex>(fixed[j]) ? 1.0 : 0.0;
      } else {
        w *= (*others[j])[a[j]];
      }
    }
    if (w > 0.0) out[a[self]] += w * UcbAt(gp, joint, a, beta);
  }
  return out;
}

ActionIndex Level1Oracle(const GpPosterior& gp, const JointSpace& joint,
                         std::size_t self, const MixedStrategy& opp, double beta) {
  std::vector<double> v(joint.agent(self).size(), 0.0);
  for (ActionIndex x = 0; x < v.size(); ++x) {
    for (ActionIndex o = 0; o < opp.size(); ++o) {
      std::vector<ActionIndex> a(2);
      a[self] = x;
      a[1 - self] = o;
      v[x] += opp[o] * UcbAt(gp, joint, a, beta);
    }
  }
  return FirstMax(v);
}

ActionIndex BestResponseOracle(const GpPosterior& gp, const JointSpace& joint,
                               std::size_t self, ActionIndex opp_action,
                               double beta) {
  std::vector<double> v(joint.agent(self).size());
  for (ActionIndex x = 0; x < v.size(); ++x) {
    std::vector<ActionIndex> a(2);
    a[self] = x;
    a[1 - self] = opp_action;
    v[x] = UcbAt(gp, joint, a, beta);
  }
  return FirstMax(v);
}

struct TwoAgentCase {
  JointSpace joint;
  GpPosterior gp0;
  GpPosterior gp1;
  MixedStrategy s0;
  MixedStrategy s1;
};

TwoAgentCase RandomCase(int n0, int n1, Rng& rng) {
  JointSpace js = TwoAgentGrid(n0, n1);
  const KernelSpec k{KernelFamily::kSquaredExponential, 0.3, 1.0};
  const auto h0 = RandomHistory(js, 8, rng);
  const auto h1 = RandomHistory(js, 8, rng);
  GpPosterior gp0 = Incremental(k, 0.01, h0);
  GpPosterior gp1 = Incremental(k, 0.01, h1);
  MixedStrategy s0 = RandomStrategy(n0, rng, 0.2);
  MixedStrategy s1 = RandomStrategy(n1, rng, 0.2);
  return {std::move(js), std::move(gp0), std::move(gp1), std::move(s0), std::move(s1)};
}

const ExpectationSpec kExact{};

TEST(Level1Test, ExactMatchesBruteForce) {
  Rng rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const auto c = RandomCase(5, 5, rng);
    for (std::size_t self : {0u, 1u}) {
      const MixedStrategy& opp = self == 0 ? c.s1 : c.s0;
      const Selection sel = Level1Select(c.gp0, c.joint, self, opp, 2.5, kExact, nullptr);
      EXPECT_EQ(sel.action, Level1Oracle(c.gp0, c.joint, self, opp, 2.5));
      ASSERT_EQ(sel.trace.size(), 1u);
      EXPECT_EQ(sel.trace[0], (ReasoningStep{1, self, sel.action}));
    }
  }
}

TEST(Level1Test, PointMassOpponentIsBestResponse) {
  Rng rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const auto c = RandomCase(6, 4, rng);
    const ActionIndex o = rep % 4;
    const Selection sel = Level1Select(c.gp0, c.joint, 0, MixedStrategy::PointMass(4, o),
                                       1.0, kExact, nullptr);
    const std::vector<ActionIndex> others{0, o};
    EXPECT_EQ(sel.action, ArgmaxLowest(UcbSlice(c.gp0, c.joint, 0, others, 1.0)));
  }
}

TEST(Level1Test, TiesGoToLowestIndex) {
  const JointSpace js = TwoAgentGrid(5, 5);
  const GpPosterior prior(KernelSpec{}, 0.01, 2);
  Rng rng(3);
  const MixedStrategy opp = RandomStrategy(5, rng);
  EXPECT_EQ(Level1Select(prior, js, 0, opp, 4.0, kExact, nullptr).action, 0u);
  EXPECT_EQ(R2b2LiteSelect(prior, js, 1, opp, 4.0, rng).action, 0u);
}

TEST(Level1Test, MonteCarloAgreesWithExactWithinClt) {
  constexpr int kSamples = 10000;
  Rng rng(4);
  int argmax_agree = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto c = RandomCase(10, 10, rng);
    const ExpectedUcb exact =
        Level1Objective(c.gp0, c.joint, 0, c.s1, 2.0, kExact, nullptr);
    const ExpectationSpec mc{ExpectationMode::kMonteCarlo, kSamples};
    Rng draw(500 + rep);
    const ExpectedUcb approx = Level1Objective(c.gp0, c.joint, 0, c.s1, 2.0, mc, &draw);
    if (rep < 10) {
      for (std::size_t x = 0; x < 10; ++x) {
        EXPECT_LE(std::abs(approx.mean[x] - exact.mean[x]),
                  3.0 * approx.stddev[x] / std::sqrt(kSamples) + 1e-12);
      }
    }
    if (ArgmaxLowest(approx.mean) == ArgmaxLowest(exact.mean)) ++argmax_agree;
  }
  EXPECT_GE(argmax_agree, 95);
}

TEST(Level1Test, DefaultSamplesAndErrors) {
  EXPECT_EQ(DefaultMonteCarloSamples(1), 500);
  EXPECT_EQ(DefaultMonteCarloSamples(2), 500);
  EXPECT_EQ(DefaultMonteCarloSamples(3), 1000);
  Rng rng(5);
  const auto c = RandomCase(4, 4, rng);
  const ExpectationSpec mc{ExpectationMode::kMonteCarlo, 10};
  EXPECT_THROW(Level1Select(c.gp0, c.joint, 0, c.s1, 1.0, mc, nullptr), InputError);
  EXPECT_THROW(Level1Select(c.gp0, c.joint, 0, MixedStrategy::Uniform(3), 1.0, kExact,
                            nullptr),
               InputError);
  ExpectationSpec tiny;
  tiny.exact_budget = 10;
  EXPECT_THROW(Level1Select(c.gp0, c.joint, 0, c.s1, 1.0, tiny, nullptr), BudgetError);
}

TEST(LevelkTest, LevelTwoMatchesTwoStageOracle) {
  Rng rng(6);
  for (int rep = 0; rep < 100; ++rep) {
    const auto c = RandomCase(5, 5, rng);
    const std::vector<AgentView> views{{&c.gp0, &c.s0, 1.5}, {&c.gp1, &c.s1, 2.5}};
    const Selection sel = LevelkSelect(c.joint, 0, views, 2, kExact, nullptr);
    const ActionIndex opp1 = Level1Oracle(c.gp1, c.joint, 1, c.s0, 2.5);
    EXPECT_EQ(sel.action, BestResponseOracle(c.gp0, c.joint, 0, opp1, 1.5));
    ASSERT_EQ(sel.trace.size(), 2u);
    EXPECT_EQ(sel.trace[0], (ReasoningStep{1, 1, opp1}));
  }
}

TEST(LevelkTest, ChainHasAlternatingEntriesAndIsReverifiable) {
  Rng rng(7);
  for (int k = 2; k <= 6; ++k) {
    const auto c = RandomCase(6, 5, rng);
    const std::vector<AgentView> views{{&c.gp0, &c.s0, 2.0}, {&c.gp1, &c.s1, 3.0}};
    const Selection sel = LevelkSelect(c.joint, 1, views, k, kExact, nullptr);
    ASSERT_EQ(sel.trace.size(), static_cast<std::size_t>(k));
    EXPECT_EQ(sel.trace.back().agent, 1u);
    EXPECT_EQ(sel.action, sel.trace.back().action);
    // Odd k starts from self's level-1 action, even k from the opponent's.
    EXPECT_EQ(sel.trace[0].agent, k % 2 == 1 ? 1u : 0u);
    for (int j = 0; j < k; ++j) EXPECT_EQ(sel.trace[j].level, j + 1);
    const GpPosterior* gps[2] = {&c.gp0, &c.gp1};
    const double betas[2] = {2.0, 3.0};
    for (int j = 1; j < k; ++j) {
      const std::size_t a = sel.trace[j].agent;
      EXPECT_NE(a, sel.trace[j - 1].agent);
      EXPECT_EQ(sel.trace[j].action,
                BestResponseOracle(*gps[a], c.joint, a, sel.trace[j - 1].action, betas[a]));
    }
  }
}

TEST(LevelkTest, PointMassBeliefSeedsChain) {
  Rng rng(8);
  const auto c = RandomCase(5, 5, rng);
  const MixedStrategy pm = MixedStrategy::PointMass(5, 3);
  const std::vector<AgentView> views{{&c.gp0, &pm, 1.0}, {&c.gp1, &c.s1, 1.0}};
  const Selection sel = LevelkSelect(c.joint, 0, views, 2, kExact, nullptr);
  const ActionIndex opp = BestResponseOracle(c.gp1, c.joint, 1, 3, 1.0);
  EXPECT_EQ(sel.trace[0].action, opp);
  EXPECT_EQ(sel.action, BestResponseOracle(c.gp0, c.joint, 0, opp, 1.0));
}

TEST(LevelkTest, Errors) {
  Rng rng(9);
  const auto c = RandomCase(4, 4, rng);
  const std::vector<AgentView> views{{&c.gp0, &c.s0, 1.0}, {&c.gp1, &c.s1, 1.0}};
  EXPECT_THROW(LevelkSelect(c.joint, 0, views, 1, kExact, nullptr), InputError);
  const std::vector<AgentView> no_model{{&c.gp0, &c.s0, 1.0}, {nullptr, &c.s1, 1.0}};
  EXPECT_THROW(LevelkSelect(c.joint, 0, no_model, 2, kExact, nullptr), ConfigError);
  const std::vector<AgentView> no_level0{{&c.gp0, nullptr, 1.0}, {&c.gp1, &c.s1, 1.0}};
  EXPECT_THROW(LevelkSelect(c.joint, 0, no_level0, 2, kExact, nullptr), ConfigError);
}

TEST(LiteTest, BestRespondsToTheSampledAction) {
  Rng rng(10);
  for (int rep = 0; rep < 30; ++rep) {
    const auto c = RandomCase(7, 5, rng);
    Rng a(rep), b(rep), replay(rep);
    const LiteSelection x = R2b2LiteSelect(c.gp0, c.joint, 0, c.s1, 2.0, a);
    const LiteSelection y = R2b2LiteSelect(c.gp0, c.joint, 0, c.s1, 2.0, b);
    EXPECT_EQ(x.action, y.action);
    EXPECT_EQ(x.sampled_opponent_action, y.sampled_opponent_action);
    EXPECT_EQ(x.sampled_opponent_action, SampleAction(c.s1, replay));
    EXPECT_EQ(x.action,
              BestResponseOracle(c.gp0, c.joint, 0, x.sampled_opponent_action, 2.0));
  }
}

TEST(LiteTest, PointMassEqualsExactLevel1) {
  Rng rng(11);
  const auto c = RandomCase(6, 6, rng);
  const MixedStrategy pm = MixedStrategy::PointMass(6, 2);
  EXPECT_EQ(R2b2LiteSelect(c.gp0, c.joint, 0, pm, 2.0, rng).action,
            Level1Select(c.gp0, c.joint, 0, pm, 2.0, kExact, nullptr).action);
}

struct ThreeAgentCase {
  JointSpace joint;
  std::vector<GpPosterior> gps;
  std::vector<MixedStrategy> strategies;
};

ThreeAgentCase RandomThreeAgent(Rng& rng) {
  JointSpace js({ActionSpace::Grid({4}), ActionSpace::Grid({4}), ActionSpace::Grid({4})});
  const KernelSpec k{KernelFamily::kSquaredExponential, 0.4, 1.0};
  std::vector<GpPosterior> gps;
  std::vector<MixedStrategy> strategies;
  for (int a = 0; a < 3; ++a) {
    gps.push_back(Incremental(k, 0.01, RandomHistory(js, 10, rng)));
    strategies.push_back(RandomStrategy(4, rng, 0.25));
  }
  return {std::move(js), std::move(gps), std::move(strategies)};
}

TEST(MultiagentTest, TwoAgentsReduceToLevel1) {
  Rng rng(12);
  for (int rep = 0; rep < 50; ++rep) {
    const auto c = RandomCase(6, 5, rng);
    const std::vector<const MixedStrategy*> s{&c.s0, &c.s1};
    EXPECT_EQ(MultiagentLevel1Select(c.gp0, c.joint, 0, s, 2.0, kExact, nullptr),
              Level1Select(c.gp0, c.joint, 0, c.s1, 2.0, kExact, nullptr).action);
    EXPECT_EQ(MultiagentLevel1Select(c.gp1, c.joint, 1, s, 2.0, kExact, nullptr),
              Level1Select(c.gp1, c.joint, 1, c.s0, 2.0, kExact, nullptr).action);
  }
}

TEST(MultiagentTest, Level1MatchesTripleLoop) {
  Rng rng(13);
  for (int rep = 0; rep < 50; ++rep) {
    const auto c = RandomThreeAgent(rng);
    const std::vector<const MixedStrategy*> s{&c.strategies[0], &c.strategies[1],
                                              &c.strategies[2]};
    for (std::size_t self = 0; self < 3; ++self) {
      const auto oracle = ExpectedOracle(c.gps[self], c.joint, self, s, {-1, -1, -1}, 1.7);
      EXPECT_EQ(MultiagentLevel1Select(c.gps[self], c.joint, self, s, 1.7, kExact, nullptr),
                FirstMax(oracle));
    }
  }
}

TEST(MultiagentTest, Level1PointMassesGiveSliceArgmax) {
  Rng rng(14);
  const auto c = RandomThreeAgent(rng);
  const MixedStrategy p1 = MixedStrategy::PointMass(4, 1);
  const MixedStrategy p2 = MixedStrategy::PointMass(4, 3);
  const std::vector<const MixedStrategy*> s{nullptr, &p1, &p2};
  const std::vector<ActionIndex> others{0, 1, 3};
  EXPECT_EQ(MultiagentLevel1Select(c.gps[0], c.joint, 0, s, 2.0, kExact, nullptr),
            ArgmaxLowest(UcbSlice(c.gps[0], c.joint, 0, others, 2.0)));
}

TEST(MultiagentTest, Level2MixedCaseMatchesEnumeration) {
  Rng rng(15);
  for (int rep = 0; rep < 50; ++rep) {
    const auto c = RandomThreeAgent(rng);
    const std::vector<const MixedStrategy*> s{&c.strategies[0], &c.strategies[1],
                                              &c.strategies[2]};
    // Agent 1 declared level 1, agent 2 declared level 0.
    const std::vector<MultiagentView> views{
        {&c.gps[0], s[0], 1.2, 0}, {&c.gps[1], s[1], 1.4, 1}, {&c.gps[2], s[2], 1.6, 0}};
    const Selection sel = MultiagentLevel2Select(c.joint, 0, views, kExact, nullptr);
    const ActionIndex x1 =
        FirstMax(ExpectedOracle(c.gps[1], c.joint, 1, s, {-1, -1, -1}, 1.4));
    const ActionIndex want =
        FirstMax(ExpectedOracle(c.gps[0], c.joint, 0, s, {-1, static_cast<int>(x1), -1}, 1.2));
    EXPECT_EQ(sel.action, want);
    ASSERT_EQ(sel.trace.size(), 2u);
    EXPECT_EQ(sel.trace[0], (ReasoningStep{1, 1, x1}));
    EXPECT_EQ(sel.trace[1], (ReasoningStep{2, 0, want}));
  }
}

TEST(MultiagentTest, Level2DegenerateReductions) {
  Rng rng(16);
  for (int rep = 0; rep < 50; ++rep) {
    const auto c = RandomThreeAgent(rng);
    const std::vector<const MixedStrategy*> s{&c.strategies[0], &c.strategies[1],
                                              &c.strategies[2]};
    // All others at level 0: same as multi-agent level 1.
    const std::vector<MultiagentView> all0{
        {&c.gps[0], s[0], 2.0, 0}, {&c.gps[1], s[1], 2.0, 0}, {&c.gps[2], s[2], 2.0, 0}};
    EXPECT_EQ(MultiagentLevel2Select(c.joint, 0, all0, kExact, nullptr).action,
              MultiagentLevel1Select(c.gps[0], c.joint, 0, s, 2.0, kExact, nullptr));

    // All others at level 1: plain best response at the simulated joint action.
    const std::vector<MultiagentView> all1{
        {&c.gps[0], s[0], 2.0, 0}, {&c.gps[1], s[1], 2.0, 1}, {&c.gps[2], s[2], 2.0, 1}};
    const Selection sel = MultiagentLevel2Select(c.joint, 0, all1, kExact, nullptr);
    const ActionIndex x1 = FirstMax(ExpectedOracle(c.gps[1], c.joint, 1, s, {-1, -1, -1}, 2.0));
    const ActionIndex x2 = FirstMax(ExpectedOracle(c.gps[2], c.joint, 2, s, {-1, -1, -1}, 2.0));
    std::vector<double> slice(4);
    for (ActionIndex x = 0; x < 4; ++x) slice[x] = UcbAt(c.gps[0], c.joint, {x, x1, x2}, 2.0);
    EXPECT_EQ(sel.action, FirstMax(slice));
  }
}

TEST(MultiagentTest, Level2RejectsHigherDeclaredLevels) {
  Rng rng(17);
  const auto c = RandomThreeAgent(rng);
  const std::vector<MultiagentView> views{{&c.gps[0], &c.strategies[0], 1.0, 0},
                                          {&c.gps[1], &c.strategies[1], 1.0, 2},
                                          {&c.gps[2], &c.strategies[2], 1.0, 0}};
  EXPECT_THROW(MultiagentLevel2Select(c.joint, 0, views, kExact, nullptr), ConfigError);
}

TEST(MultiagentTest, ExactBudgetOverflowIsBudgetError) {
  Rng rng(18);
  const auto c = RandomThreeAgent(rng);
  const std::vector<const MixedStrategy*> s{&c.strategies[0], &c.strategies[1],
                                            &c.strategies[2]};
  ExpectationSpec tiny;
  tiny.exact_budget = 20;
  EXPECT_THROW(MultiagentLevel1Select(c.gps[0], c.joint, 0, s, 1.0, tiny, nullptr),
               BudgetError);
  const ExpectationSpec mc{ExpectationMode::kMonteCarlo, 200, 20};
  EXPECT_NO_THROW(MultiagentLevel1Select(c.gps[0], c.joint, 0, s, 1.0, mc, &rng));
}

TEST(MultiagentTest, LiteBestRespondsToJointDraw) {
  Rng rng(19);
  const auto c = RandomThreeAgent(rng);
  const std::vector<const MixedStrategy*> s{nullptr, &c.strategies[1], &c.strategies[2]};
  Rng a(5);
  const Selection sel = MultiagentLiteSelect(c.gps[0], c.joint, 0, s, 2.0, a);
  Rng replay(5);
  const ActionIndex d1 = SampleAction(c.strategies[1], replay);
  const ActionIndex d2 = SampleAction(c.strategies[2], replay);
  std::vector<double> slice(4);
  for (ActionIndex x = 0; x < 4; ++x) slice[x] = UcbAt(c.gps[0], c.joint, {x, d1, d2}, 2.0);
  EXPECT_EQ(sel.action, FirstMax(slice));
}

}  // namespace
}  // namespace r2b2
