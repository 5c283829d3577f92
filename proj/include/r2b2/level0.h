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

#ifndef R2B2_LEVEL0_H_
#define R2B2_LEVEL0_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "r2b2/action_space.h"
#include "r2b2/gp.h"
#include "r2b2/kernel.h"
#include "r2b2/rng.h"

namespace r2b2 {

// Probability distribution over one agent's actions. Always nonnegative and
// normalized; construction renormalizes and rejects all-zero input.
class MixedStrategy {
 public:
  explicit MixedStrategy(std::vector<double> probs);

  static MixedStrategy Uniform(std::size_t n);
  static MixedStrategy PointMass(std::size_t n, ActionIndex at);

  std::size_t size() const { return probs_.size(); }
  const std::vector<double>& probs() const { return probs_; }
  double operator[](ActionIndex i) const { return probs_[i]; }

 private:
  std::vector<double> probs_;
};

MixedStrategy UniformStrategy(const ActionSpace& space);

ActionIndex SampleAction(const MixedStrategy& strategy, Rng& rng);

// Sum over coordinates of the variance of a point drawn from `strategy`.
double CovarianceTrace(const MixedStrategy& strategy, const ActionSpace& space);

// Random Fourier features phi_i(x) = sqrt(2 sv / d') cos(w_i . x + b_i) with
// w_i drawn from the SE spectral density N(0, I / l^2) and b_i ~ U[0, 2 pi].
struct RandomFeatureMap {
  Eigen::MatrixXd frequencies;  // num_features x dim
  Eigen::VectorXd phases;
  double scale = 1.0;

  int num_features() const { return static_cast<int>(phases.size()); }
  Eigen::VectorXd Features(std::span<const double> x) const;
};

inline constexpr int kDefaultNumFeatures = 5;

RandomFeatureMap BuildFeatureMap(const KernelSpec& spec, int dim,
                                 int num_features, std::uint64_t seed);

// Softmax of log-weights.
MixedStrategy StrategyFromLogWeights(const Eigen::VectorXd& log_weights);

// GP-MW: multiplicative weights whose losses are 1 - clamp(UCB, 0, 1) over the
// agent's own domain with the other agents fixed at their realized actions.
class GpMwState {
 public:
  GpMwState(std::size_t domain_size, double learning_rate);

  double learning_rate() const { return learning_rate_; }
  const Eigen::VectorXd& log_weights() const { return log_weights_; }
  MixedStrategy Strategy() const { return StrategyFromLogWeights(log_weights_); }

  GpMwState WithLearningRate(double learning_rate) const;

  // w_i <- w_i exp(-eta * loss_i), kept in the log domain.
  GpMwState ApplyLosses(std::span<const double> losses) const;

  std::pair<GpMwState, MixedStrategy> Update(
      const GpPosterior& gp, const JointSpace& joint, std::size_t agent,
      std::span<const ActionIndex> realized_actions, double beta) const;

 private:
  double learning_rate_;
  Eigen::VectorXd log_weights_;
};

// sqrt(8 ln|X| / horizon).
double GpMwLearningRate(std::size_t domain_size, int horizon);

// EXP3 for adversarial linear bandits on random features. Exploitation weights
// are exponential in the cumulative importance-weighted least-squares loss
// estimates theta_hat = Q^+ phi(a) loss with Q = E_P[phi phi^T]; the played
// distribution mixes in gamma_t = min(1, sqrt(|X| ln|X| / t)) of uniform
// exploration.
class Exp3State {
 public:
  Exp3State(const ActionSpace& space, const RandomFeatureMap& features,
            double learning_rate, bool clamp_payoff = true);

  const MixedStrategy& strategy() const { return strategy_; }
  int round() const { return round_; }
  double learning_rate() const { return learning_rate_; }
  const Eigen::MatrixXd& feature_matrix() const { return phi_; }

  // Consumes the payoff in [0,1] of `played` (drawn from strategy()) and
  // returns the next-round state and distribution.
  std::pair<Exp3State, MixedStrategy> Step(double observed_payoff,
                                           ActionIndex played) const;

 private:
  void Refresh();

  Eigen::MatrixXd phi_;
  Eigen::VectorXd log_weights_;
  double learning_rate_;
  bool clamp_payoff_;
  int round_ = 1;
  MixedStrategy strategy_;
};

// sqrt(2 ln|X| / (d' horizon)).
double Exp3LearningRate(std::size_t domain_size, int num_features, int horizon);

// --- Pluggable level-0 interface -------------------------------------------

// Round-t feedback for one modeled agent. `posterior` already includes the
// round-t observation.
struct Level0Feedback {
  const GpPosterior& posterior;
  const JointSpace& joint;
  std::size_t agent;
  std::span<const ActionIndex> joint_actions;
  double observed_payoff;
  double beta;
  int t;
};

// Anything producing a per-round action distribution qualifies as a level-0
// strategy.
class Level0Strategy {
 public:
  virtual ~Level0Strategy() = default;
  virtual const MixedStrategy& Current() const = 0;
  virtual void Observe(const Level0Feedback& feedback) = 0;
  virtual std::unique_ptr<Level0Strategy> Clone() const = 0;
};

enum class Level0Kind { kRandom, kExp3, kGpMw };

std::string Level0KindName(Level0Kind kind);
Level0Kind ParseLevel0Kind(const std::string& name);

struct Level0Config {
  Level0Kind kind = Level0Kind::kGpMw;
  std::optional<double> learning_rate;  // default: horizon-tuned
  bool anytime = false;                 // GP-MW: eta_t = sqrt(8 ln|X| / t)
  int num_features = kDefaultNumFeatures;
  bool clamp_payoff = true;             // EXP3: clamp instead of rejecting

  // Canonical text form; equal keys mean identical behaviour.
  std::string Key() const;
};

// `feature_seed` only matters for EXP3.
std::unique_ptr<Level0Strategy> MakeLevel0(const Level0Config& config,
                                           const JointSpace& joint,
                                           std::size_t agent,
                                           const KernelSpec& kernel,
                                           int horizon,
                                           std::uint64_t feature_seed);

}  // namespace r2b2

#endif  // R2B2_LEVEL0_H_
