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

#ifndef R2B2_REASONING_H_
#define R2B2_REASONING_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "r2b2/action_space.h"
#include "r2b2/gp.h"
#include "r2b2/level0.h"
#include "r2b2/rng.h"

namespace r2b2 {

enum class ExpectationMode { kExact, kMonteCarlo };

// How expectations over opponents' level-0 strategies are evaluated.
struct ExpectationSpec {
  ExpectationMode mode = ExpectationMode::kExact;
  int samples = 0;  // Monte Carlo draws; 0 picks DefaultMonteCarloSamples
  // Exact mode refuses more than this many joint UCB evaluations.
  std::size_t exact_budget = std::size_t{1} << 24;
};

// 500 draws for opponent spaces of dimension <= 2, 1000 otherwise.
int DefaultMonteCarloSamples(int opponent_dim);

// One simulated or selected action in a reasoning chain.
struct ReasoningStep {
  int level = 0;
  std::size_t agent = 0;
  ActionIndex action = 0;

  bool operator==(const ReasoningStep&) const = default;
};

using ReasoningTrace = std::vector<ReasoningStep>;

struct Selection {
  ActionIndex action = 0;
  ReasoningTrace trace;
};

// What the selecting agent believes about one other agent: a mixed strategy
// to average over, or a single action to hold fixed.
struct OpponentBelief {
  const MixedStrategy* strategy = nullptr;
  std::optional<ActionIndex> fixed;
};

struct ExpectedUcb {
  std::vector<double> mean;    // per own action
  std::vector<double> stddev;  // per own action, Monte Carlo mode only
};

// E[UCB(x_self, x_others)] for every own action, with others drawn
// independently from their beliefs. `beliefs` has one entry per agent; the
// entry for `self` is ignored.
ExpectedUcb ExpectedUcbOverOthers(const GpPosterior& gp,
                                  const JointSpace& joint, std::size_t self,
                                  std::span<const OpponentBelief> beliefs,
                                  double beta, const ExpectationSpec& spec,
                                  Rng* rng);

// Two-agent level-1 action: argmax over own actions of the expected UCB under
// the opponent's level-0 strategy. `rng` is required in Monte Carlo mode.
Selection Level1Select(const GpPosterior& gp, const JointSpace& joint,
                       std::size_t self, const MixedStrategy& opponent,
                       double beta, const ExpectationSpec& spec, Rng* rng);

// Expected UCB values behind Level1Select.
ExpectedUcb Level1Objective(const GpPosterior& gp, const JointSpace& joint,
                            std::size_t self, const MixedStrategy& opponent,
                            double beta, const ExpectationSpec& spec, Rng* rng);

// Per-agent inputs to recursive reasoning. `posterior` is the agent's GP over
// its own payoff (for the opponent: the model rebuilt from the shared history)
// and `level0` its level-0 strategy as seen by the other side.
struct AgentView {
  const GpPosterior* posterior = nullptr;
  const MixedStrategy* level0 = nullptr;
  double beta = 0.0;
};

// Two-agent level-k action (k >= 2). The chain starts at the level-1 action
// of `self` when k is odd and of the opponent when k is even, then alternates
// single-action best responses up to level k. The trace lists levels 1..k.
Selection LevelkSelect(const JointSpace& joint, std::size_t self,
                       std::span<const AgentView> views, int k,
                       const ExpectationSpec& spec, Rng* rng);

struct LiteSelection {
  ActionIndex action = 0;
  ActionIndex sampled_opponent_action = 0;
};

// Best response to one draw from the opponent's level-0 strategy.
LiteSelection R2b2LiteSelect(const GpPosterior& gp, const JointSpace& joint,
                             std::size_t self, const MixedStrategy& opponent,
                             double beta, Rng& rng);

// Level-1 for M agents: expectation over the product of every other agent's
// level-0 strategy. `strategies` has one entry per agent (self ignored).
ActionIndex MultiagentLevel1Select(
    const GpPosterior& gp, const JointSpace& joint, std::size_t self,
    std::span<const MixedStrategy* const> strategies, double beta,
    const ExpectationSpec& spec, Rng* rng);

// Lite variant for M agents: best response to one joint draw of the others.
Selection MultiagentLiteSelect(const GpPosterior& gp, const JointSpace& joint,
                               std::size_t self,
                               std::span<const MixedStrategy* const> strategies,
                               double beta, Rng& rng);

struct MultiagentView {
  const GpPosterior* posterior = nullptr;
  const MixedStrategy* level0 = nullptr;
  double beta = 0.0;
  int declared_level = 0;  // how `self` believes this agent reasons
};

// Level-2 for M agents whose other agents are declared at level 0 or 1:
// level-1 agents' actions are simulated with MultiagentLevel1Select and held
// fixed, level-0 agents are averaged over.
Selection MultiagentLevel2Select(const JointSpace& joint, std::size_t self,
                                 std::span<const MultiagentView> views,
                                 const ExpectationSpec& spec, Rng* rng);

}  // namespace r2b2

#endif  // R2B2_REASONING_H_
