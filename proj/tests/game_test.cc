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
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "r2b2/errors.h"
#include "r2b2/game.h"
#include "r2b2/trace_io.h"
#include "test_util.h"

namespace r2b2 {
namespace {

using testing::TwoAgentGrid;

const KernelSpec kGameKernel{KernelFamily::kSquaredExponential, 0.1, 1.0};

AgentSpec Level(int level, bool lite = false) {
  AgentSpec a;
  a.level = level;
  a.lite = lite;
  return a;
}

GameOptions Options(int horizon, std::uint64_t seed) {
  GameOptions o;
  o.horizon = horizon;
  o.seed = seed;
  o.kernel = kGameKernel;
  return o;
}

std::string Serialize(const GameTrace& trace) {
  std::ostringstream out;
  WriteTrace(out, trace, nlohmann::ordered_json::object());
  return out.str();
}

TEST(BuildGameTest, PayoffIdentitiesAndRange) {
  const JointSpace js = TwoAgentGrid(12, 10);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PayoffTable common = BuildGame(GameType::kCommonPayoff, kGameKernel, js, seed);
    EXPECT_EQ(common.values(0), common.values(1));

    const PayoffTable constant = BuildGame(GameType::kConstantSum, kGameKernel, js, seed);
    const Eigen::VectorXd sum = constant.values(0) + constant.values(1);
    EXPECT_LE((sum.array() - 1.0).abs().maxCoeff(), 1e-12);

    const PayoffTable general = BuildGame(GameType::kGeneralSum, kGameKernel, js, seed);
    for (std::size_t a = 0; a < 2; ++a) {
      EXPECT_DOUBLE_EQ(general.values(a).minCoeff(), 0.0);
      EXPECT_DOUBLE_EQ(general.values(a).maxCoeff(), 1.0);
    }
    // The same seed gives the same f_0 whatever the game type.
    EXPECT_EQ(common.values(0), general.values(0));
  }
}

TEST(BuildGameTest, GeneralSumPayoffsAreUncorrelated) {
  const JointSpace js = TwoAgentGrid(20, 20);
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PayoffTable g = BuildGame(GameType::kGeneralSum, kGameKernel, js, 100 + seed);
    const Eigen::ArrayXd a = g.values(0).array() - g.values(0).mean();
    const Eigen::ArrayXd b = g.values(1).array() - g.values(1).mean();
    total += (a * b).sum() / std::sqrt((a * a).sum() * (b * b).sum());
  }
  EXPECT_LT(std::abs(total / 10.0), 0.1);
}

TEST(BuildGameTest, ScalingAndNames) {
  EXPECT_EQ(MinMaxScale(Eigen::VectorXd::Constant(4, 3.0)), Eigen::VectorXd::Constant(4, 0.5));
  const Eigen::VectorXd v = (Eigen::VectorXd(3) << -1.0, 1.0, 0.0).finished();
  EXPECT_EQ(MinMaxScale(v), (Eigen::VectorXd(3) << 0.0, 1.0, 0.5).finished());
  for (auto t : {GameType::kCommonPayoff, GameType::kGeneralSum, GameType::kConstantSum}) {
    EXPECT_EQ(ParseGameType(GameTypeName(t)), t);
  }
  EXPECT_THROW(ParseGameType("zero_sum"), InputError);
}

// Hand-built 2x2 game for the regret definitions:
//   f_0(x0, x1) rows x0, columns x1:  [0.2 0.9]
//                                     [0.6 0.1]
PayoffTable HandGame() {
  const JointSpace js = TwoAgentGrid(2, 2);
  Eigen::VectorXd f0(4);
  for (ActionIndex x0 = 0; x0 < 2; ++x0) {
    for (ActionIndex x1 = 0; x1 < 2; ++x1) {
      const double v[2][2] = {{0.2, 0.9}, {0.6, 0.1}};
      f0(static_cast<Eigen::Index>(js.Flatten(std::vector<ActionIndex>{x0, x1}))) = v[x0][x1];
    }
  }
  return PayoffTable(js, {f0, Eigen::VectorXd::Constant(4, 1.0) - f0});
}

GameTrace TraceOf(const PayoffTable& game,
                  const std::vector<std::vector<ActionIndex>>& plays) {
  GameTrace trace;
  int t = 1;
  for (const auto& a : plays) {
    IterationRecord r;
    r.t = t++;
    r.actions = a;
    for (std::size_t i = 0; i < 2; ++i) {
      r.truth.push_back(game.value(i, a));
      r.noisy.push_back(r.truth.back());
    }
    trace.iterations.push_back(std::move(r));
  }
  return trace;
}

TEST(RegretTest, TwoByTwoHandComputation) {
  const PayoffTable g = HandGame();
  // Agent 0 plays 0 then 1; agent 1 plays 1 then 0.
  // Realized: f(0,1) + f(1,0) = 0.9 + 0.6 = 1.5.
  // Fixed 0: f(0,1) + f(0,0) = 1.1. Fixed 1: f(1,1) + f(1,0) = 0.7.
  const GameTrace trace = TraceOf(g, {{0, 1}, {1, 0}});
  EXPECT_NEAR(ExternalRegret(trace, g, 0, 2), 1.1 - 1.5, 1e-12);
  // Prefix 1: best fixed against x1 = 1 is action 0, which was played.
  EXPECT_NEAR(ExternalRegret(trace, g, 0, 1), 0.0, 1e-12);
  // Mean regret: gaps to max 0.9 are 0.0 and 0.3.
  EXPECT_NEAR(MeanRegret(trace, g, 0, 2), 0.15, 1e-12);
  EXPECT_NEAR(MeanRegret(trace, g, 0, 1), 0.0, 1e-12);
  EXPECT_THROW(ExternalRegret(trace, g, 0, 3), InputError);
  EXPECT_THROW(MeanRegret(trace, g, 2, 1), InputError);
}

TEST(RegretTest, HindsightPlayHasZeroRegret) {
  const PayoffTable g = HandGame();
  // Against x1 = 1 throughout, action 0 is the hindsight best.
  const GameTrace trace = TraceOf(g, {{0, 1}, {0, 1}, {0, 1}});
  EXPECT_NEAR(ExternalRegret(trace, g, 0, 3), 0.0, 1e-12);
  EXPECT_NEAR(MeanRegret(trace, g, 0, 3), 0.0, 1e-12);
}

TEST(RegretTest, CurvesMatchDirectAndDominate) {
  const JointSpace js = TwoAgentGrid(8, 8);
  const PayoffTable g = BuildGame(GameType::kGeneralSum, kGameKernel, js, 4);
  const GameTrace trace = RunRepeatedGame(g, {Level(1), Level(0)}, Options(40, 9));
  for (std::size_t agent : {0u, 1u}) {
    const auto ext = ExternalRegretCurve(trace, g, agent);
    const auto mean = MeanRegretCurve(trace, g, agent);
    ASSERT_EQ(ext.size(), 40u);
    for (int t = 1; t <= 40; ++t) {
      EXPECT_NEAR(ext[t - 1], ExternalRegret(trace, g, agent, t), 1e-12);
      EXPECT_NEAR(mean[t - 1], MeanRegret(trace, g, agent, t), 1e-12);
      EXPECT_GE(mean[t - 1] * t, ext[t - 1] - 1e-12);
    }
  }
}

TEST(RegretTest, ConstantC1) {
  EXPECT_NEAR(RegretConstantC1(0.01), 8.0 / std::log(101.0), 1e-15);
  EXPECT_THROW(RegretConstantC1(0.0), InputError);
}

TEST(RunGameTest, SingleIterationSmoke) {
  const JointSpace js = TwoAgentGrid(5, 7);
  const PayoffTable g = BuildGame(GameType::kGeneralSum, kGameKernel, js, 1);
  AgentSpec random;
  random.level0.kind = Level0Kind::kRandom;
  const GameTrace trace = RunRepeatedGame(g, {random, random}, Options(1, 3));
  ASSERT_EQ(trace.iterations.size(), 1u);
  ASSERT_EQ(trace.init.size(), 1u);
  const auto& it = trace.iterations[0];
  EXPECT_EQ(it.t, 1);
  EXPECT_LT(it.actions[0], 5u);
  EXPECT_LT(it.actions[1], 7u);
  EXPECT_DOUBLE_EQ(it.truth[1], g.value(1, it.actions));
}

TEST(RunGameTest, ZeroNoiseObservesTruth) {
  const JointSpace js = TwoAgentGrid(6, 6);
  const PayoffTable g = BuildGame(GameType::kCommonPayoff, kGameKernel, js, 2);
  AgentSpec a = Level(1);
  a.noise_variance = 0.0;
  AgentSpec b = Level(0);
  b.noise_variance = 0.0;
  const GameTrace trace = RunRepeatedGame(g, {a, b}, Options(15, 5));
  for (const auto& it : trace.iterations) {
    EXPECT_EQ(it.noisy, it.truth);
  }
}

TEST(RunGameTest, ReplayIsBitIdentical) {
  const JointSpace js = TwoAgentGrid(8, 6);
  const PayoffTable g = BuildGame(GameType::kConstantSum, kGameKernel, js, 3);
  AgentSpec exp3 = Level(0);
  exp3.level0.kind = Level0Kind::kExp3;
  const std::vector<AgentSpec> roster{Level(2), exp3};
  const std::string a = Serialize(RunRepeatedGame(g, roster, Options(30, 77)));
  const std::string b = Serialize(RunRepeatedGame(g, roster, Options(30, 77)));
  const std::string c = Serialize(RunRepeatedGame(g, roster, Options(30, 78)));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(RunGameTest, SelectionsDependOnlyOnPastHistory) {
  // Offline recomputation: replay the logged history into a fresh session and
  // re-derive every choice from what was known before that iteration.
  const JointSpace js = TwoAgentGrid(7, 7);
  const PayoffTable g = BuildGame(GameType::kGeneralSum, kGameKernel, js, 6);
  const std::vector<AgentSpec> roster{Level(1), Level(0)};
  const GameOptions opt = Options(25, 12);
  const GameTrace trace = RunRepeatedGame(g, roster, opt);

  GameSession offline(g, roster, opt, /*rebuild_from_history=*/true);
  for (const auto& init : trace.init) offline.Observe(init.actions, init.noisy, 0);
  for (const auto& it : trace.iterations) {
    for (std::size_t i = 0; i < 2; ++i) {
      const Selection s = offline.Select(i, it.t);
      EXPECT_EQ(s.action, it.actions[i]) << "t=" << it.t << " agent " << i;
      EXPECT_EQ(s.trace, it.reasoning[i]);
    }
    offline.Observe(it.actions, it.noisy, it.t);
  }
}

TEST(RunGameTest, NoiseStatistics) {
  const JointSpace js = TwoAgentGrid(4, 4);
  const PayoffTable g = BuildGame(GameType::kGeneralSum, kGameKernel, js, 0);
  AgentSpec a;
  a.noise_variance = 0.04;
  const GameSession session(g, {a, a}, Options(10, 31));
  constexpr int kN = 10000;
  double sum = 0.0, sq = 0.0;
  for (int t = 1; t <= kN; ++t) {
    const double e = session.Noise(0, t);
    sum += e;
    sq += e * e;
  }
  const double mean = sum / kN;
  const double var = sq / kN - mean * mean;
  EXPECT_LT(std::abs(mean), 3.0 * 0.2 / 100.0);
  EXPECT_NEAR(var, 0.04, 0.004);
}

TEST(RunGameTest, ObserverSeesEveryIterationBeforeSelection) {
  const JointSpace js = TwoAgentGrid(5, 5);
  const PayoffTable g = BuildGame(GameType::kCommonPayoff, kGameKernel, js, 8);
  std::vector<int> seen;
  std::vector<Eigen::Index> history_sizes;
  RunRepeatedGame(g, {Level(1), Level(0)}, Options(6, 1),
                  [&](int t, const GameSession& s) {
                    seen.push_back(t);
                    history_sizes.push_back(s.posterior(0).num_observations());
                  });
  EXPECT_EQ(seen, (std::vector<int>{1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(history_sizes, (std::vector<Eigen::Index>{1, 2, 3, 4, 5, 6}));
}

TEST(RunGameTest, MultiAgentRostersRun) {
  const JointSpace js({ActionSpace::Grid({4}), ActionSpace::Grid({4}), ActionSpace::Grid({4})});
  const PayoffTable g = BuildGame(GameType::kGeneralSum, kGameKernel, js, 3);
  AgentSpec l2 = Level(2);
  l2.believed_levels = {0, 0, 1};
  const GameTrace trace = RunRepeatedGame(g, {l2, Level(1), Level(1, true)}, Options(8, 4));
  ASSERT_EQ(trace.iterations.size(), 8u);
  for (const auto& it : trace.iterations) {
    ASSERT_EQ(it.actions.size(), 3u);
    ASSERT_EQ(it.reasoning[0].size(), 2u);
    EXPECT_EQ(it.reasoning[0][0].agent, 2u);
  }
}

TEST(RunGameTest, ConfigurationErrors) {
  const JointSpace js = TwoAgentGrid(4, 4);
  const PayoffTable g = BuildGame(GameType::kGeneralSum, kGameKernel, js, 0);
  EXPECT_THROW(GameSession(g, {Level(0)}, Options(5, 0)), ConfigError);
  EXPECT_THROW(GameSession(g, {Level(0, true), Level(0)}, Options(5, 0)), ConfigError);
  EXPECT_THROW(GameSession(g, {Level(0), Level(0)}, Options(0, 0)), ConfigError);
  GameOptions bad = Options(5, 0);
  bad.beta_scale = -1.0;
  EXPECT_THROW(GameSession(g, {Level(0), Level(0)}, bad), ConfigError);

  const JointSpace js3({ActionSpace::Grid({3}), ActionSpace::Grid({3}), ActionSpace::Grid({3})});
  const PayoffTable g3 = BuildGame(GameType::kGeneralSum, kGameKernel, js3, 0);
  EXPECT_THROW(GameSession(g3, {Level(3), Level(0), Level(0)}, Options(5, 0)), ConfigError);
  AgentSpec believes_level2 = Level(2);
  believes_level2.believed_levels = {0, 2, 0};
  EXPECT_THROW(GameSession(g3, {believes_level2, Level(0), Level(0)}, Options(5, 0)),
               ConfigError);
}

TEST(TraceIoTest, RoundTripAndMalformedInput) {
  const JointSpace js = TwoAgentGrid(6, 5);
  const PayoffTable g = BuildGame(GameType::kGeneralSum, kGameKernel, js, 5);
  const GameTrace trace = RunRepeatedGame(g, {Level(2), Level(1, true)}, Options(12, 2));
  nlohmann::ordered_json meta;
  meta["note"] = "x";
  std::ostringstream out;
  WriteTrace(out, trace, meta);
  std::istringstream in(out.str());
  nlohmann::ordered_json meta_back;
  const GameTrace back = ReadTrace(in, &meta_back);
  EXPECT_EQ(meta_back["note"], "x");
  EXPECT_EQ(Serialize(back), Serialize(trace));
  ASSERT_EQ(back.iterations.size(), trace.iterations.size());
  for (std::size_t i = 0; i < back.iterations.size(); ++i) {
    EXPECT_EQ(back.iterations[i].noisy, trace.iterations[i].noisy);
    EXPECT_EQ(back.iterations[i].reasoning, trace.iterations[i].reasoning);
  }

  std::istringstream garbage("{\"format\":\"something-else\"}\n");
  EXPECT_THROW(ReadTrace(garbage), IoError);
  std::istringstream truncated(out.str().substr(0, out.str().size() / 2));
  EXPECT_THROW(ReadTrace(truncated), IoError);
}

}  // namespace
}  // namespace r2b2
