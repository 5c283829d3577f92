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

#include "r2b2/reasoning.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "r2b2/acquisition.h"
#include "r2b2/errors.h"

namespace r2b2 {
namespace {

constexpr std::size_t kChunkPoints = 4096;

struct Support {
  std::vector<ActionIndex> actions;
  std::vector<double> probs;
};

Support SupportOf(const OpponentBelief& belief, std::size_t agent,
                  std::size_t space_size) {
  Support s;
  if (belief.fixed) {
    if (*belief.fixed >= space_size) {
      throw InputError("fixed opponent action out of range for agent " +
                       std::to_string(agent));
    }
    s.actions.push_back(*belief.fixed);
    s.probs.push_back(1.0);
    return s;
  }
  if (belief.strategy == nullptr) {
    throw ConfigError("no level-0 strategy model for agent " +
                      std::to_string(agent));
  }
  if (belief.strategy->size() != space_size) {
    throw InputError("level-0 strategy of agent " + std::to_string(agent) +
                     " does not match its action space");
  }
  for (std::size_t i = 0; i < space_size; ++i) {
    if ((*belief.strategy)[i] > 0.0) {
      s.actions.push_back(i);
      s.probs.push_back((*belief.strategy)[i]);
    }
  }
  if (s.actions.empty()) throw InputError("opponent strategy has empty support");
  return s;
}

int SamplesFor(const ExpectationSpec& spec, int opponent_dim) {
  const int n =
      spec.samples > 0 ? spec.samples : DefaultMonteCarloSamples(opponent_dim);
  if (n < 1) throw InputError("Monte Carlo expectation needs >= 1 sample");
  return n;
}

// UCB at (own action x, others fixed to `combo`) for all x, for a list of
// combos. Result row c holds the own-action values for combo c.
std::vector<std::vector<double>> EvaluateCombos(
    const GpPosterior& gp, const JointSpace& joint, std::size_t self,
    const std::vector<std::vector<ActionIndex>>& combos, double beta) {
  const std::size_t own = joint.agent(self).size();
  std::vector<std::vector<double>> out(combos.size(),
                                       std::vector<double>(own, 0.0));
  const std::size_t per_chunk = std::max<std::size_t>(1, kChunkPoints / own);
  std::vector<double> row(joint.dim());
  for (std::size_t start = 0; start < combos.size(); start += per_chunk) {
    const std::size_t end = std::min(combos.size(), start + per_chunk);
    Eigen::MatrixXd points(static_cast<Eigen::Index>((end - start) * own),
                           joint.dim());
    Eigen::Index r = 0;
    for (std::size_t c = start; c < end; ++c) {
      std::vector<ActionIndex> actions = combos[c];
      for (std::size_t x = 0; x < own; ++x, ++r) {
        actions[self] = x;
        joint.FillPoint(actions, row.data());
        for (int d = 0; d < joint.dim(); ++d) points(r, d) = row[d];
      }
    }
    const Eigen::VectorXd u = UcbBatch(gp, points, beta);
    r = 0;
    for (std::size_t c = start; c < end; ++c) {
      for (std::size_t x = 0; x < own; ++x, ++r) out[c][x] = u(r);
    }
  }
  return out;
}

ExpectedUcb MonteCarloFromCounts(
    const std::map<std::vector<ActionIndex>, int>& counts, int n,
    const GpPosterior& gp, const JointSpace& joint, std::size_t self,
    double beta) {
  std::vector<std::vector<ActionIndex>> combos;
  std::vector<int> weights;
  for (const auto& [combo, count] : counts) {
    combos.push_back(combo);
    weights.push_back(count);
  }
  const auto values = EvaluateCombos(gp, joint, self, combos, beta);
  const std::size_t own = joint.agent(self).size();
  ExpectedUcb out{std::vector<double>(own, 0.0), std::vector<double>(own, 0.0)};
  for (std::size_t c = 0; c < combos.size(); ++c) {
    for (std::size_t x = 0; x < own; ++x) {
      out.mean[x] += weights[c] * values[c][x];
    }
  }
  for (double& m : out.mean) m /= n;
  if (n > 1) {
    for (std::size_t c = 0; c < combos.size(); ++c) {
      for (std::size_t x = 0; x < own; ++x) {
        const double d = values[c][x] - out.mean[x];
        out.stddev[x] += weights[c] * d * d;
      }
    }
    for (double& s : out.stddev) s = std::sqrt(s / (n - 1));
  }
  return out;
}

void CheckTwoAgent(const JointSpace& joint, std::size_t self) {
  if (joint.num_agents() != 2) {
    throw InputError("two-agent selection used on a game with " +
                     std::to_string(joint.num_agents()) + " agents");
  }
  if (self > 1) throw InputError("agent index out of range");
}

Selection SingleStep(ActionIndex action, int level, std::size_t agent) {
  return {action, {{level, agent, action}}};
}

}  // namespace

int DefaultMonteCarloSamples(int opponent_dim) {
  return opponent_dim <= 2 ? 500 : 1000;
}

ExpectedUcb ExpectedUcbOverOthers(const GpPosterior& gp,
                                  const JointSpace& joint, std::size_t self,
                                  std::span<const OpponentBelief> beliefs,
                                  double beta, const ExpectationSpec& spec,
                                  Rng* rng) {
  const std::size_t m = joint.num_agents();
  if (self >= m) throw InputError("agent index out of range");
  if (beliefs.size() != m) {
    throw InputError("expected one opponent belief per agent");
  }
  if (gp.input_dim() != joint.dim()) {
    throw InputError("posterior dimension does not match the joint space");
  }
  const std::size_t own = joint.agent(self).size();

  if (spec.mode == ExpectationMode::kMonteCarlo) {
    if (rng == nullptr) throw InputError("Monte Carlo expectation needs an RNG");
    int opp_dim = 0;
    for (std::size_t a = 0; a < m; ++a) {
      if (a == self) continue;
      SupportOf(beliefs[a], a, joint.agent(a).size());  // validates
      if (!beliefs[a].fixed) opp_dim += joint.agent(a).dim();
    }
    const int n = SamplesFor(spec, opp_dim);
    std::map<std::vector<ActionIndex>, int> counts;
    std::vector<ActionIndex> draw(m, 0);
    for (int s = 0; s < n; ++s) {
      for (std::size_t a = 0; a < m; ++a) {
        if (a == self) continue;
        draw[a] = beliefs[a].fixed ? *beliefs[a].fixed
                                   : SampleAction(*beliefs[a].strategy, *rng);
      }
      ++counts[draw];
    }
    return MonteCarloFromCounts(counts, n, gp, joint, self, beta);
  }

  std::vector<Support> supports(m);
  std::size_t combos = 1;
  for (std::size_t a = 0; a < m; ++a) {
    if (a == self) continue;
    supports[a] = SupportOf(beliefs[a], a, joint.agent(a).size());
    combos *= supports[a].actions.size();
    if (combos * own > spec.exact_budget) {
      throw BudgetError(
          "exact expectation exceeds the evaluation budget of " +
          std::to_string(spec.exact_budget) + "; use monte_carlo mode");
    }
  }

  // Enumerate the product support row-major in agent order.
  std::vector<std::vector<ActionIndex>> combo_actions;
  std::vector<double> combo_weights;
  combo_actions.reserve(combos);
  std::vector<std::size_t> pos(m, 0);
  for (std::size_t c = 0; c < combos; ++c) {
    std::vector<ActionIndex> actions(m, 0);
    double w = 1.0;
    for (std::size_t a = 0; a < m; ++a) {
      if (a == self) continue;
      actions[a] = supports[a].actions[pos[a]];
      w *= supports[a].probs[pos[a]];
    }
    combo_actions.push_back(std::move(actions));
    combo_weights.push_back(w);
    for (std::size_t a = m; a-- > 0;) {
      if (a == self) continue;
      if (++pos[a] < supports[a].actions.size()) break;
      pos[a] = 0;
    }
  }
  const auto values = EvaluateCombos(gp, joint, self, combo_actions, beta);
  ExpectedUcb out{std::vector<double>(own, 0.0), {}};
  for (std::size_t c = 0; c < combos; ++c) {
    for (std::size_t x = 0; x < own; ++x) {
      out.mean[x] += combo_weights[c] * values[c][x];
    }
  }
  return out;
}

ExpectedUcb Level1Objective(const GpPosterior& gp, const JointSpace& joint,
                            std::size_t self, const MixedStrategy& opponent,
                            double beta, const ExpectationSpec& spec,
                            Rng* rng) {
  CheckTwoAgent(joint, self);
  const std::size_t opp = 1 - self;
  const std::size_t own_n = joint.agent(self).size();
  const std::size_t opp_n = joint.agent(opp).size();
  if (opponent.size() != opp_n) {
    throw InputError("opponent strategy does not match its action space");
  }
  std::vector<ActionIndex> pair(2);
  auto flat = [&](ActionIndex x, ActionIndex o) {
    pair[self] = x;
    pair[opp] = o;
    return joint.Flatten(pair);
  };

  if (spec.mode == ExpectationMode::kExact) {
    if (joint.size() > spec.exact_budget) {
      throw BudgetError("exact level-1 expectation exceeds the budget; use "
                        "monte_carlo mode");
    }
    const Eigen::VectorXd alpha = UcbGrid(gp, joint, beta);
    ExpectedUcb out{std::vector<double>(own_n, 0.0), {}};
    for (ActionIndex o = 0; o < opp_n; ++o) {
      const double p = opponent[o];
      if (p <= 0.0) continue;
      for (ActionIndex x = 0; x < own_n; ++x) {
        out.mean[x] += p * alpha(static_cast<Eigen::Index>(flat(x, o)));
      }
    }
    return out;
  }

  if (rng == nullptr) throw InputError("Monte Carlo expectation needs an RNG");
  const int n = SamplesFor(spec, joint.agent(opp).dim());
  std::map<std::vector<ActionIndex>, int> counts;
  std::vector<ActionIndex> draw(2, 0);
  for (int s = 0; s < n; ++s) {
    draw[opp] = SampleAction(opponent, *rng);
    ++counts[draw];
  }
  return MonteCarloFromCounts(counts, n, gp, joint, self, beta);
}

Selection Level1Select(const GpPosterior& gp, const JointSpace& joint,
                       std::size_t self, const MixedStrategy& opponent,
                       double beta, const ExpectationSpec& spec, Rng* rng) {
  const ExpectedUcb obj =
      Level1Objective(gp, joint, self, opponent, beta, spec, rng);
  return SingleStep(ArgmaxLowest(obj.mean), 1, self);
}

Selection LevelkSelect(const JointSpace& joint, std::size_t self,
                       std::span<const AgentView> views, int k,
                       const ExpectationSpec& spec, Rng* rng) {
  CheckTwoAgent(joint, self);
  if (k < 2) {
    throw InputError("level-k selection needs k >= 2, got " + std::to_string(k));
  }
  if (views.size() != 2) throw InputError("level-k selection needs two views");
  const std::size_t opp = 1 - self;
  if (views[self].posterior == nullptr) {
    throw ConfigError("level-k selection: missing own posterior");
  }
  if (views[opp].posterior == nullptr) {
    throw ConfigError("level-k selection: missing opponent posterior model");
  }
  const std::size_t base = (k % 2 == 1) ? self : opp;
  const std::size_t base_other = 1 - base;
  if (views[base_other].level0 == nullptr) {
    throw ConfigError("level-k selection: missing level-0 strategy model of "
                      "agent " + std::to_string(base_other));
  }

  Rng child;
  Rng* child_ptr = nullptr;
  if (rng != nullptr) {
    child = MakeRng(DeriveSeed((*rng)(), "levelk-base"));
    child_ptr = &child;
  }
  const Selection level1 =
      Level1Select(*views[base].posterior, joint, base,
                   *views[base_other].level0, views[base].beta, spec, child_ptr);

  Selection out;
  out.trace.push_back({1, base, level1.action});
  std::vector<ActionIndex> actions(2, 0);
  actions[base] = level1.action;
  std::size_t agent = base_other;
  for (int level = 2; level <= k; ++level) {
    const auto slice = UcbSlice(*views[agent].posterior, joint, agent, actions,
                                views[agent].beta);
    const ActionIndex a = ArgmaxLowest(slice);
    actions[agent] = a;
    out.trace.push_back({level, agent, a});
    agent = 1 - agent;
  }
  out.action = out.trace.back().action;
  return out;
}

LiteSelection R2b2LiteSelect(const GpPosterior& gp, const JointSpace& joint,
                             std::size_t self, const MixedStrategy& opponent,
                             double beta, Rng& rng) {
  CheckTwoAgent(joint, self);
  const std::size_t opp = 1 - self;
  if (opponent.size() != joint.agent(opp).size()) {
    throw InputError("opponent strategy does not match its action space");
  }
  std::vector<ActionIndex> actions(2, 0);
  actions[opp] = SampleAction(opponent, rng);
  const auto slice = UcbSlice(gp, joint, self, actions, beta);
  return {ArgmaxLowest(slice), actions[opp]};
}

ActionIndex MultiagentLevel1Select(
    const GpPosterior& gp, const JointSpace& joint, std::size_t self,
    std::span<const MixedStrategy* const> strategies, double beta,
    const ExpectationSpec& spec, Rng* rng) {
  if (strategies.size() != joint.num_agents()) {
    throw InputError("expected one level-0 strategy per agent");
  }
  std::vector<OpponentBelief> beliefs(strategies.size());
  for (std::size_t a = 0; a < strategies.size(); ++a) {
    if (a != self) beliefs[a].strategy = strategies[a];
  }
  const ExpectedUcb obj =
      ExpectedUcbOverOthers(gp, joint, self, beliefs, beta, spec, rng);
  return ArgmaxLowest(obj.mean);
}

Selection MultiagentLiteSelect(const GpPosterior& gp, const JointSpace& joint,
                               std::size_t self,
                               std::span<const MixedStrategy* const> strategies,
                               double beta, Rng& rng) {
  if (strategies.size() != joint.num_agents()) {
    throw InputError("expected one level-0 strategy per agent");
  }
  std::vector<ActionIndex> actions(joint.num_agents(), 0);
  for (std::size_t a = 0; a < actions.size(); ++a) {
    if (a == self) continue;
    if (strategies[a] == nullptr) {
      throw ConfigError("no level-0 strategy model for agent " +
                        std::to_string(a));
    }
    actions[a] = SampleAction(*strategies[a], rng);
  }
  const auto slice = UcbSlice(gp, joint, self, actions, beta);
  return SingleStep(ArgmaxLowest(slice), 1, self);
}

Selection MultiagentLevel2Select(const JointSpace& joint, std::size_t self,
                                 std::span<const MultiagentView> views,
                                 const ExpectationSpec& spec, Rng* rng) {
  const std::size_t m = joint.num_agents();
  if (self >= m) throw InputError("agent index out of range");
  if (views.size() != m) throw InputError("expected one view per agent");
  if (views[self].posterior == nullptr) {
    throw ConfigError("multi-agent level-2: missing own posterior");
  }
  for (std::size_t a = 0; a < m; ++a) {
    if (a == self) continue;
    if (views[a].declared_level != 0 && views[a].declared_level != 1) {
      throw ConfigError(
          "multi-agent level-2 reasoning supports opponents at levels 0 and 1 "
          "only; agent " + std::to_string(a) + " is declared at level " +
          std::to_string(views[a].declared_level));
    }
  }

  std::uint64_t parent = 0;
  if (rng != nullptr) parent = (*rng)();

  Selection out;
  std::vector<OpponentBelief> beliefs(m);
  std::vector<const MixedStrategy*> level0(m, nullptr);
  for (std::size_t a = 0; a < m; ++a) level0[a] = views[a].level0;

  for (std::size_t a = 0; a < m; ++a) {
    if (a == self) continue;
    if (views[a].declared_level == 0) {
      beliefs[a].strategy = views[a].level0;
      continue;
    }
    if (views[a].posterior == nullptr) {
      throw ConfigError("multi-agent level-2: missing posterior model of "
                        "agent " + std::to_string(a));
    }
    Rng child;
    Rng* child_ptr = nullptr;
    if (rng != nullptr) {
      child = MakeRng(DeriveSeed(parent, "multiagent-level1", a));
      child_ptr = &child;
    }
    const ActionIndex x = MultiagentLevel1Select(*views[a].posterior, joint, a,
                                                 level0, views[a].beta, spec,
                                                 child_ptr);
    beliefs[a].fixed = x;
    out.trace.push_back({1, a, x});
  }

  Rng child;
  Rng* child_ptr = nullptr;
  if (rng != nullptr) {
    child = MakeRng(DeriveSeed(parent, "multiagent-level2"));
    child_ptr = &child;
  }
  const ExpectedUcb obj = ExpectedUcbOverOthers(
      *views[self].posterior, joint, self, beliefs, views[self].beta, spec,
      child_ptr);
  out.action = ArgmaxLowest(obj.mean);
  out.trace.push_back({2, self, out.action});
  return out;
}

}  // namespace r2b2
