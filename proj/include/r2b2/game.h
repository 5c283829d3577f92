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

#ifndef R2B2_GAME_H_
#define R2B2_GAME_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "r2b2/acquisition.h"
#include "r2b2/action_space.h"
#include "r2b2/gp.h"
#include "r2b2/kernel.h"
#include "r2b2/level0.h"
#include "r2b2/reasoning.h"

namespace r2b2 {

enum class GameType { kCommonPayoff, kGeneralSum, kConstantSum };

std::string GameTypeName(GameType type);
GameType ParseGameType(const std::string& name);

// Ground-truth payoffs: one value per joint action per agent.
class PayoffTable {
 public:
  PayoffTable(JointSpace joint, std::vector<Eigen::VectorXd> values);

  const JointSpace& joint() const { return joint_; }
  std::size_t num_agents() const { return values_.size(); }
  const Eigen::VectorXd& values(std::size_t agent) const {
    return values_.at(agent);
  }
  double value(std::size_t agent, std::size_t flat) const {
    return values_.at(agent)(static_cast<Eigen::Index>(flat));
  }
  double value(std::size_t agent, std::span<const ActionIndex> actions) const {
    return value(agent, joint_.Flatten(actions));
  }
  double max(std::size_t agent) const { return values_.at(agent).maxCoeff(); }

 private:
  JointSpace joint_;
  std::vector<Eigen::VectorXd> values_;
};

// (v - min) / (max - min); a constant input maps to 0.5 everywhere.
Eigen::VectorXd MinMaxScale(const Eigen::VectorXd& v);

// Synthetic game over `joint`. Common-payoff: every agent gets the scaled
// f_0. General-sum: each agent gets an independent scaled draw. Constant-sum:
// agent 0 gets the scaled f_0 and every other agent gets 1 - f_0.
PayoffTable BuildGame(GameType type, const KernelSpec& kernel,
                      const JointSpace& joint, std::uint64_t seed);

struct AgentSpec {
  int level = 0;
  bool lite = false;  // level 1 only: best-respond to one sampled action
  Level0Config level0;
  double noise_variance = 0.01;
  std::optional<KernelSpec> kernel;  // GP kernel; defaults to the game kernel
  // Per other agent: the level-0 strategy this agent attributes to it.
  // Empty, or nullopt entries, mean the other agent's actual level-0 config.
  std::vector<std::optional<Level0Config>> believed_level0;
  // Multi-agent level 2: declared level (0 or 1) of each other agent. Empty
  // means every other agent is at level 1.
  std::vector<int> believed_levels;
  ExpectationSpec expectation;
};

struct GameOptions {
  int horizon = 150;
  double delta = 0.1;
  bool tight_beta = false;
  double beta_scale = 1.0;  // multiplies beta_t; 1 keeps the theoretical value
  int init_size = 1;
  std::uint64_t seed = 0;
  KernelSpec kernel;  // generating kernel; agents default to it
  bool record_reasoning = true;
};

struct InitRecord {
  std::vector<ActionIndex> actions;
  std::vector<double> noisy;
  std::vector<double> truth;
};

struct IterationRecord {
  int t = 0;
  std::vector<ActionIndex> actions;
  std::vector<double> noisy;
  std::vector<double> truth;
  std::vector<ReasoningTrace> reasoning;   // per agent
  std::vector<double> level0_cov_trace;    // per agent, before selection
};

struct GameTrace {
  std::uint64_t seed = 0;
  std::vector<InitRecord> init;
  std::vector<IterationRecord> iterations;
};

// Live state of one repeated game under perfect monitoring: each agent's
// posterior over its own payoff and every level-0 strategy any agent models.
// Because hyperparameters and the whole history are common knowledge, the
// posterior agent j keeps for itself is exactly the model any other agent
// reconstructs for j.
class GameSession {
 public:
  // With `rebuild_from_history` every observation refactorizes posteriors
  // from the full history instead of extending the factor.
  GameSession(const PayoffTable& game, std::vector<AgentSpec> agents,
              GameOptions options, bool rebuild_from_history = false);

  const PayoffTable& game() const { return *game_; }
  const JointSpace& joint() const { return game_->joint(); }
  const std::vector<AgentSpec>& agents() const { return agents_; }
  const GameOptions& options() const { return options_; }

  const GpPosterior& posterior(std::size_t agent) const {
    return posteriors_.at(agent);
  }
  double BetaFor(std::size_t agent, int t) const;

  // Actual level-0 strategy of `agent`.
  const MixedStrategy& Level0(std::size_t agent) const;
  // Level-0 strategy that `observer` attributes to `modeled`.
  const MixedStrategy& BelievedLevel0(std::size_t observer,
                                      std::size_t modeled) const;

  // Iteration-t choice of one agent: a function of the history before t,
  // the agent's spec and its (seed, t) stream only.
  Selection Select(std::size_t agent, int t) const;
  std::vector<Selection> SelectAll(int t) const;

  // Conditions every posterior on the joint action and each agent's noisy
  // payoff. For t >= 1 the level-0 strategies are updated as well; t == 0
  // marks initialization data.
  void Observe(std::span<const ActionIndex> actions,
               std::span<const double> noisy, int t);

  // Gaussian noise added to agent `agent`'s payoff at iteration t (t == 0
  // with `init_index` for initialization samples).
  double Noise(std::size_t agent, int t, int init_index = 0) const;

 private:
  using StateKey = std::pair<std::size_t, std::string>;

  void Validate() const;
  const Level0Config& BelievedConfig(std::size_t observer,
                                     std::size_t modeled) const;
  void Register(std::size_t modeled, const Level0Config& config);
  const MixedStrategy& StrategyFor(std::size_t modeled,
                                   const Level0Config& config) const;

  std::shared_ptr<const PayoffTable> game_;
  std::vector<AgentSpec> agents_;
  GameOptions options_;
  bool rebuild_;
  std::vector<GpPosterior> posteriors_;
  std::map<StateKey, std::unique_ptr<Level0Strategy>> level0_;
  Eigen::MatrixXd history_inputs_;
  std::vector<std::vector<double>> history_outputs_;
};

// Uniformly random initial joint actions drawn from the game seed's "init"
// stream.
std::vector<std::vector<ActionIndex>> InitialActions(const JointSpace& joint,
                                                     std::uint64_t seed,
                                                     int count);

using IterationObserver = std::function<void(int t, const GameSession&)>;

// Runs init_size random initial joint actions, then `horizon` iterations of
// simultaneous selection, noisy payoff observation and belief updates.
GameTrace RunRepeatedGame(const PayoffTable& game,
                          const std::vector<AgentSpec>& agents,
                          const GameOptions& options,
                          const IterationObserver& observer = {});

// External regret of `agent` over the first `up_to` iterations against the
// best fixed action in hindsight for that prefix, on noise-free payoffs.
double ExternalRegret(const GameTrace& trace, const PayoffTable& game,
                      std::size_t agent, int up_to);

// Average gap to the global maximum of the agent's payoff table.
double MeanRegret(const GameTrace& trace, const PayoffTable& game,
                  std::size_t agent, int up_to);

// Values for every prefix T' = 1..T (hindsight argmax recomputed per prefix).
std::vector<double> ExternalRegretCurve(const GameTrace& trace,
                                        const PayoffTable& game,
                                        std::size_t agent);
std::vector<double> MeanRegretCurve(const GameTrace& trace,
                                    const PayoffTable& game, std::size_t agent);

// 8 / ln(1 + 1/noise_variance); logged for reference.
double RegretConstantC1(double noise_variance);

}  // namespace r2b2

#endif  // R2B2_GAME_H_
