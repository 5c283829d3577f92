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

#include "r2b2/game.h"

#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include "r2b2/errors.h"
#include "r2b2/prior.h"
#include "r2b2/rng.h"

namespace r2b2 {

std::string GameTypeName(GameType type) {
  switch (type) {
    case GameType::kCommonPayoff:
      return "common_payoff";
    case GameType::kGeneralSum:
      return "general_sum";
    case GameType::kConstantSum:
      return "constant_sum";
  }
  return "unknown";
}

GameType ParseGameType(const std::string& name) {
  if (name == "common_payoff") return GameType::kCommonPayoff;
  if (name == "general_sum") return GameType::kGeneralSum;
  if (name == "constant_sum") return GameType::kConstantSum;
  throw InputError("unknown game type '" + name +
                   "' (expected common_payoff, general_sum or constant_sum)");
}

PayoffTable::PayoffTable(JointSpace joint, std::vector<Eigen::VectorXd> values)
    : joint_(std::move(joint)), values_(std::move(values)) {
  if (values_.size() != joint_.num_agents()) {
    throw InputError("payoff table needs one value vector per agent");
  }
  for (const auto& v : values_) {
    if (static_cast<std::size_t>(v.size()) != joint_.size()) {
      throw InputError("payoff vector length does not match the joint space");
    }
  }
}

Eigen::VectorXd MinMaxScale(const Eigen::VectorXd& v) {
  if (v.size() == 0) return v;
  const double lo = v.minCoeff();
  const double hi = v.maxCoeff();
  if (!(hi > lo)) return Eigen::VectorXd::Constant(v.size(), 0.5);
  return ((v.array() - lo) / (hi - lo)).matrix();
}

PayoffTable BuildGame(GameType type, const KernelSpec& kernel,
                      const JointSpace& joint, std::uint64_t seed) {
  kernel.Validate();
  const std::size_t m = joint.num_agents();
  if (m < 2) throw InputError("a game needs at least two agents");
  std::vector<Eigen::VectorXd> values(m);
  const Eigen::VectorXd first =
      MinMaxScale(SamplePrior(kernel, joint, DeriveSeed(seed, "payoff", 0)));
  values[0] = first;
  for (std::size_t i = 1; i < m; ++i) {
    switch (type) {
      case GameType::kCommonPayoff:
        values[i] = first;
        break;
      case GameType::kConstantSum:
        values[i] = (1.0 - first.array()).matrix();
        break;
      case GameType::kGeneralSum:
        values[i] = MinMaxScale(
            SamplePrior(kernel, joint, DeriveSeed(seed, "payoff", i)));
        break;
    }
  }
  return PayoffTable(joint, std::move(values));
}

// --- GameSession -------------------------------------------------------------

GameSession::GameSession(const PayoffTable& game, std::vector<AgentSpec> agents,
                         GameOptions options, bool rebuild_from_history)
    : game_(std::make_shared<const PayoffTable>(game)),
      agents_(std::move(agents)),
      options_(options),
      rebuild_(rebuild_from_history),
      history_inputs_(0, game.joint().dim()),
      history_outputs_(agents_.size()) {
  Validate();
  const JointSpace& js = joint();
  const std::size_t m = agents_.size();
  posteriors_.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    posteriors_.emplace_back(agents_[i].kernel.value_or(options_.kernel),
                             agents_[i].noise_variance, js.dim());
  }
  for (std::size_t i = 0; i < m; ++i) {
    Register(i, agents_[i].level0);
    if (agents_[i].level < 1) continue;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i) Register(j, BelievedConfig(i, j));
    }
  }
}

void GameSession::Validate() const {
  const JointSpace& js = joint();
  const std::size_t m = js.num_agents();
  if (agents_.size() != m) {
    throw ConfigError("expected " + std::to_string(m) + " agent specs, got " +
                      std::to_string(agents_.size()));
  }
  if (options_.horizon < 1) throw ConfigError("horizon must be at least 1");
  if (options_.init_size < 0) throw ConfigError("init_size must be >= 0");
  BetaSchedule{js.agent(0).size(), options_.delta, options_.tight_beta}
      .Validate();
  if (!(options_.beta_scale >= 0.0) || !std::isfinite(options_.beta_scale)) {
    throw ConfigError("beta_scale must be finite and >= 0");
  }
  options_.kernel.Validate();
  for (std::size_t i = 0; i < m; ++i) {
    const AgentSpec& a = agents_[i];
    const std::string who = "agent " + std::to_string(i) + ": ";
    if (a.level < 0) throw ConfigError(who + "level must be >= 0");
    if (a.lite && a.level != 1) {
      throw ConfigError(who + "the lite variant exists for level 1 only");
    }
    if (!(a.noise_variance >= 0.0) || !std::isfinite(a.noise_variance)) {
      throw ConfigError(who + "noise_variance must be finite and >= 0");
    }
    if (a.kernel) a.kernel->Validate();
    if (!a.believed_level0.empty() && a.believed_level0.size() != m) {
      throw ConfigError(who + "believed_level0 needs one entry per agent");
    }
    if (m > 2 && a.level > 2) {
      throw ConfigError(who +
                        "with more than two agents only levels 0-2 are "
                        "supported");
    }
    if (!a.believed_levels.empty()) {
      if (a.believed_levels.size() != m) {
        throw ConfigError(who + "believed_levels needs one entry per agent");
      }
      for (std::size_t j = 0; j < m; ++j) {
        if (j == i) continue;
        const int l = a.believed_levels[j];
        if (l < 0 || l > 1) {
          throw ConfigError(who +
                            "believed_levels entries must be 0 or 1; a "
                            "level-2 agent can only model level-0/1 agents");
        }
      }
    }
  }
}

const Level0Config& GameSession::BelievedConfig(std::size_t observer,
                                                std::size_t modeled) const {
  if (observer == modeled) return agents_[modeled].level0;
  const auto& beliefs = agents_[observer].believed_level0;
  if (!beliefs.empty() && beliefs[modeled]) return *beliefs[modeled];
  return agents_[modeled].level0;
}

void GameSession::Register(std::size_t modeled, const Level0Config& config) {
  StateKey key{modeled, config.Key()};
  if (level0_.count(key)) return;
  const KernelSpec kernel = agents_[modeled].kernel.value_or(options_.kernel);
  level0_.emplace(std::move(key),
                  MakeLevel0(config, joint(), modeled, kernel, options_.horizon,
                             DeriveSeed(options_.seed, "features", modeled)));
}

const MixedStrategy& GameSession::StrategyFor(std::size_t modeled,
                                              const Level0Config& config) const {
  auto it = level0_.find(StateKey{modeled, config.Key()});
  if (it == level0_.end()) {
    throw InternalError("level-0 state for agent " + std::to_string(modeled) +
                        " was never registered");
  }
  return it->second->Current();
}

const MixedStrategy& GameSession::Level0(std::size_t agent) const {
  return StrategyFor(agent, agents_.at(agent).level0);
}

const MixedStrategy& GameSession::BelievedLevel0(std::size_t observer,
                                                 std::size_t modeled) const {
  return StrategyFor(modeled, BelievedConfig(observer, modeled));
}

double GameSession::BetaFor(std::size_t agent, int t) const {
  return options_.beta_scale *
         Beta(BetaSchedule{joint().agent(agent).size(), options_.delta,
                           options_.tight_beta},
              t);
}

Selection GameSession::Select(std::size_t agent, int t) const {
  const JointSpace& js = joint();
  const std::size_t m = js.num_agents();
  const AgentSpec& spec = agents_.at(agent);
  Rng rng = MakeRng(DeriveSeed(DeriveSeed(options_.seed, "agent", agent),
                               "select", static_cast<std::uint64_t>(t)));
  const double beta = BetaFor(agent, t);
  const GpPosterior& gp = posteriors_[agent];

  if (spec.level == 0) {
    const ActionIndex a = SampleAction(Level0(agent), rng);
    return Selection{a, {ReasoningStep{0, agent, a}}};
  }

  if (m == 2) {
    const std::size_t opp = 1 - agent;
    const MixedStrategy& believed = BelievedLevel0(agent, opp);
    if (spec.level == 1 && spec.lite) {
      const LiteSelection s = R2b2LiteSelect(gp, js, agent, believed, beta, rng);
      return Selection{s.action,
                       {ReasoningStep{0, opp, s.sampled_opponent_action},
                        ReasoningStep{1, agent, s.action}}};
    }
    if (spec.level == 1) {
      return Level1Select(gp, js, agent, believed, beta, spec.expectation,
                          &rng);
    }
    std::vector<AgentView> views(2);
    views[agent] = AgentView{&gp, &Level0(agent), beta};
    views[opp] = AgentView{&posteriors_[opp], &believed, BetaFor(opp, t)};
    return LevelkSelect(js, agent, views, spec.level, spec.expectation, &rng);
  }

  std::vector<const MixedStrategy*> strategies(m);
  for (std::size_t j = 0; j < m; ++j) {
    strategies[j] = j == agent ? &Level0(agent) : &BelievedLevel0(agent, j);
  }
  if (spec.level == 1 && spec.lite) {
    return MultiagentLiteSelect(gp, js, agent, strategies, beta, rng);
  }
  if (spec.level == 1) {
    const ActionIndex a = MultiagentLevel1Select(gp, js, agent, strategies,
                                                 beta, spec.expectation, &rng);
    return Selection{a, {ReasoningStep{1, agent, a}}};
  }
  std::vector<MultiagentView> views(m);
  for (std::size_t j = 0; j < m; ++j) {
    const int declared = j == agent ? 2
                         : spec.believed_levels.empty()
                             ? 1
                             : spec.believed_levels[j];
    views[j] = MultiagentView{&posteriors_[j], strategies[j], BetaFor(j, t),
                              declared};
  }
  return MultiagentLevel2Select(js, agent, views, spec.expectation, &rng);
}

std::vector<Selection> GameSession::SelectAll(int t) const {
  std::vector<Selection> out;
  out.reserve(agents_.size());
  for (std::size_t i = 0; i < agents_.size(); ++i) out.push_back(Select(i, t));
  return out;
}

void GameSession::Observe(std::span<const ActionIndex> actions,
                          std::span<const double> noisy, int t) {
  const JointSpace& js = joint();
  const std::size_t m = js.num_agents();
  if (actions.size() != m || noisy.size() != m) {
    throw InputError("observation needs one action and one payoff per agent");
  }
  const Eigen::VectorXd z = js.Point(actions);
  if (rebuild_) {
    const Eigen::Index n = history_inputs_.rows();
    history_inputs_.conservativeResize(n + 1, Eigen::NoChange);
    history_inputs_.row(n) = z.transpose();
    for (std::size_t i = 0; i < m; ++i) {
      history_outputs_[i].push_back(noisy[i]);
      const GpPosterior& old = posteriors_[i];
      posteriors_[i] = GpPosterior::FromHistory(
          old.kernel(), old.noise_variance(), history_inputs_,
          Eigen::Map<const Eigen::VectorXd>(
              history_outputs_[i].data(),
              static_cast<Eigen::Index>(history_outputs_[i].size())));
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      posteriors_[i] = posteriors_[i].Condition(
          std::span<const double>(z.data(), static_cast<std::size_t>(z.size())),
          noisy[i]);
    }
  }
  if (t < 1) return;
  for (auto& [key, state] : level0_) {
    const std::size_t j = key.first;
    state->Observe(Level0Feedback{posteriors_[j], js, j, actions, noisy[j],
                                  BetaFor(j, t), t});
  }
}

double GameSession::Noise(std::size_t agent, int t, int init_index) const {
  const double var = agents_.at(agent).noise_variance;
  if (var == 0.0) return 0.0;
  const std::uint64_t base = DeriveSeed(options_.seed, "noise", agent);
  const std::uint64_t seed =
      t < 1 ? DeriveSeed(base, "init", static_cast<std::uint64_t>(init_index))
            : DeriveSeed(base, "round", static_cast<std::uint64_t>(t));
  Rng rng = MakeRng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  return std::sqrt(var) * normal(rng);
}

// --- Game loop ---------------------------------------------------------------

std::vector<std::vector<ActionIndex>> InitialActions(const JointSpace& joint,
                                                     std::uint64_t seed,
                                                     int count) {
  Rng rng = MakeRng(DeriveSeed(seed, "init"));
  std::vector<std::vector<ActionIndex>> out;
  for (int k = 0; k < count; ++k) {
    std::vector<ActionIndex> actions(joint.num_agents());
    for (std::size_t i = 0; i < actions.size(); ++i) {
      std::uniform_int_distribution<std::size_t> pick(0,
                                                      joint.agent(i).size() - 1);
      actions[i] = pick(rng);
    }
    out.push_back(std::move(actions));
  }
  return out;
}

GameTrace RunRepeatedGame(const PayoffTable& game,
                          const std::vector<AgentSpec>& agents,
                          const GameOptions& options,
                          const IterationObserver& observer) {
  GameSession session(game, agents, options);
  const JointSpace& js = game.joint();
  const std::size_t m = js.num_agents();

  GameTrace trace;
  trace.seed = options.seed;
  const auto init_actions =
      InitialActions(js, options.seed, options.init_size);
  for (int k = 0; k < options.init_size; ++k) {
    InitRecord rec;
    rec.actions = init_actions[static_cast<std::size_t>(k)];
    const std::size_t flat = js.Flatten(rec.actions);
    for (std::size_t i = 0; i < m; ++i) {
      rec.truth.push_back(game.value(i, flat));
      rec.noisy.push_back(rec.truth.back() + session.Noise(i, 0, k));
    }
    session.Observe(rec.actions, rec.noisy, 0);
    trace.init.push_back(std::move(rec));
  }

  trace.iterations.reserve(static_cast<std::size_t>(options.horizon));
  for (int t = 1; t <= options.horizon; ++t) {
    if (observer) observer(t, session);
    IterationRecord rec;
    rec.t = t;
    for (std::size_t i = 0; i < m; ++i) {
      rec.level0_cov_trace.push_back(
          CovarianceTrace(session.Level0(i), js.agent(i)));
    }
    std::vector<Selection> picks = session.SelectAll(t);
    for (auto& s : picks) {
      rec.actions.push_back(s.action);
      if (options.record_reasoning) rec.reasoning.push_back(std::move(s.trace));
    }
    const std::size_t flat = js.Flatten(rec.actions);
    for (std::size_t i = 0; i < m; ++i) {
      rec.truth.push_back(game.value(i, flat));
      rec.noisy.push_back(rec.truth.back() + session.Noise(i, t));
    }
    session.Observe(rec.actions, rec.noisy, t);
    trace.iterations.push_back(std::move(rec));
  }
  return trace;
}

// --- Regret ------------------------------------------------------------------

namespace {

void CheckPrefix(const GameTrace& trace, const PayoffTable& game,
                 std::size_t agent, int up_to) {
  if (agent >= game.num_agents()) throw InputError("agent index out of range");
  if (up_to < 1 || static_cast<std::size_t>(up_to) > trace.iterations.size()) {
    throw InputError("regret prefix must lie in [1, " +
                     std::to_string(trace.iterations.size()) + "]");
  }
}

// Adds f_agent(x, others_t) for every own action x to `sums`.
void AccumulateCounterfactual(const PayoffTable& game, std::size_t agent,
                              const IterationRecord& rec,
                              std::vector<double>& sums) {
  std::vector<ActionIndex> actions = rec.actions;
  for (std::size_t x = 0; x < sums.size(); ++x) {
    actions[agent] = x;
    sums[x] += game.value(agent, actions);
  }
}

}  // namespace

double ExternalRegret(const GameTrace& trace, const PayoffTable& game,
                      std::size_t agent, int up_to) {
  CheckPrefix(trace, game, agent, up_to);
  std::vector<double> sums(game.joint().agent(agent).size(), 0.0);
  double realized = 0.0;
  for (int t = 0; t < up_to; ++t) {
    const auto& rec = trace.iterations[static_cast<std::size_t>(t)];
    AccumulateCounterfactual(game, agent, rec, sums);
    realized += game.value(agent, rec.actions);
  }
  return sums[ArgmaxLowest(sums)] - realized;
}

double MeanRegret(const GameTrace& trace, const PayoffTable& game,
                  std::size_t agent, int up_to) {
  CheckPrefix(trace, game, agent, up_to);
  const double best = game.max(agent);
  double total = 0.0;
  for (int t = 0; t < up_to; ++t) {
    total += best - game.value(agent, trace.iterations[static_cast<std::size_t>(t)].actions);
  }
  return total / up_to;
}

std::vector<double> ExternalRegretCurve(const GameTrace& trace,
                                        const PayoffTable& game,
                                        std::size_t agent) {
  const int n = static_cast<int>(trace.iterations.size());
  if (n == 0) return {};
  CheckPrefix(trace, game, agent, n);
  std::vector<double> sums(game.joint().agent(agent).size(), 0.0);
  std::vector<double> curve;
  curve.reserve(static_cast<std::size_t>(n));
  double realized = 0.0;
  for (const auto& rec : trace.iterations) {
    AccumulateCounterfactual(game, agent, rec, sums);
    realized += game.value(agent, rec.actions);
    curve.push_back(sums[ArgmaxLowest(sums)] - realized);
  }
  return curve;
}

std::vector<double> MeanRegretCurve(const GameTrace& trace,
                                    const PayoffTable& game,
                                    std::size_t agent) {
  const int n = static_cast<int>(trace.iterations.size());
  if (n == 0) return {};
  CheckPrefix(trace, game, agent, n);
  const double best = game.max(agent);
  std::vector<double> curve;
  curve.reserve(static_cast<std::size_t>(n));
  double total = 0.0;
  for (int t = 0; t < n; ++t) {
    total += best - game.value(agent, trace.iterations[static_cast<std::size_t>(t)].actions);
    curve.push_back(total / (t + 1));
  }
  return curve;
}

double RegretConstantC1(double noise_variance) {
  if (!(noise_variance > 0.0)) {
    throw InputError("C1 needs a positive noise variance");
  }
  return 8.0 / std::log1p(1.0 / noise_variance);
}

}  // namespace r2b2
