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

#include "r2b2/level0.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "r2b2/acquisition.h"
#include "r2b2/errors.h"

namespace r2b2 {

MixedStrategy::MixedStrategy(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) throw InputError("MixedStrategy: empty support");
  // Extended precision keeps 1e4-point supports normalized to ~1e-16.
  long double total = 0.0L;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw InputError("MixedStrategy: probabilities must be finite and >= 0");
    }
    total += p;
  }
  if (!(total > 0.0L)) {
    throw InputError("MixedStrategy: all probabilities are zero");
  }
  for (double& p : probs_) {
    p = static_cast<double>(static_cast<long double>(p) / total);
  }
}

MixedStrategy MixedStrategy::Uniform(std::size_t n) {
  if (n == 0) throw InputError("uniform strategy over an empty space");
  return MixedStrategy(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

MixedStrategy MixedStrategy::PointMass(std::size_t n, ActionIndex at) {
  if (at >= n) throw InputError("point mass outside the action space");
  std::vector<double> p(n, 0.0);
  p[at] = 1.0;
  return MixedStrategy(std::move(p));
}

MixedStrategy UniformStrategy(const ActionSpace& space) {
  return MixedStrategy::Uniform(space.size());
}

ActionIndex SampleAction(const MixedStrategy& strategy, Rng& rng) {
  std::discrete_distribution<std::size_t> dist(strategy.probs().begin(),
                                               strategy.probs().end());
  return dist(rng);
}

double CovarianceTrace(const MixedStrategy& strategy,
                       const ActionSpace& space) {
  if (strategy.size() != space.size()) {
    throw InputError("CovarianceTrace: strategy and space sizes differ");
  }
  double trace = 0.0;
  for (int d = 0; d < space.dim(); ++d) {
    double mean = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i) {
      mean += strategy[i] * space.point(i)[d];
    }
    double var = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i) {
      const double diff = space.point(i)[d] - mean;
      var += strategy[i] * diff * diff;
    }
    trace += var;
  }
  return trace;
}

Eigen::VectorXd RandomFeatureMap::Features(std::span<const double> x) const {
  if (static_cast<Eigen::Index>(x.size()) != frequencies.cols()) {
    throw InputError("RandomFeatureMap: input dimension mismatch");
  }
  const Eigen::Map<const Eigen::VectorXd> v(x.data(),
                                            static_cast<Eigen::Index>(x.size()));
  const double amp = std::sqrt(2.0 * scale / num_features());
  return amp * ((frequencies * v + phases).array().cos()).matrix();
}

RandomFeatureMap BuildFeatureMap(const KernelSpec& spec, int dim,
                                 int num_features, std::uint64_t seed) {
  spec.Validate();
  if (spec.family != KernelFamily::kSquaredExponential) {
    throw InputError("random features are only available for the SE kernel");
  }
  if (dim <= 0 || num_features <= 0) {
    throw InputError("random features need positive dim and feature count");
  }
  Rng rng = MakeRng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / spec.length_scale);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  RandomFeatureMap map;
  map.frequencies.resize(num_features, dim);
  map.phases.resize(num_features);
  map.scale = spec.signal_variance;
  for (int i = 0; i < num_features; ++i) {
    for (int d = 0; d < dim; ++d) map.frequencies(i, d) = normal(rng);
    map.phases(i) = phase(rng);
  }
  return map;
}

MixedStrategy StrategyFromLogWeights(const Eigen::VectorXd& log_weights) {
  const double top = log_weights.maxCoeff();
  std::vector<double> p(static_cast<std::size_t>(log_weights.size()));
  for (Eigen::Index i = 0; i < log_weights.size(); ++i) {
    p[i] = std::exp(log_weights(i) - top);
  }
  return MixedStrategy(std::move(p));
}

// -- GP-MW --------------------------------------------------------------------

GpMwState::GpMwState(std::size_t domain_size, double learning_rate)
    : learning_rate_(learning_rate),
      log_weights_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain_size))) {
  if (domain_size == 0) throw InputError("GP-MW over an empty space");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw InputError("GP-MW learning rate must be finite and >= 0");
  }
}

GpMwState GpMwState::WithLearningRate(double learning_rate) const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw InputError("GP-MW learning rate must be finite and >= 0");
  }
  GpMwState next(*this);
  next.learning_rate_ = learning_rate;
  return next;
}

GpMwState GpMwState::ApplyLosses(std::span<const double> losses) const {
  if (static_cast<Eigen::Index>(losses.size()) != log_weights_.size()) {
    throw InputError("GP-MW: loss vector length differs from the domain");
  }
  GpMwState next(*this);
  for (Eigen::Index i = 0; i < next.log_weights_.size(); ++i) {
    next.log_weights_(i) -= learning_rate_ * losses[i];
  }
  // Shift so the largest log-weight is zero; the distribution is unchanged.
  next.log_weights_.array() -= next.log_weights_.maxCoeff();
  return next;
}

std::pair<GpMwState, MixedStrategy> GpMwState::Update(
    const GpPosterior& gp, const JointSpace& joint, std::size_t agent,
    std::span<const ActionIndex> realized_actions, double beta) const {
  if (joint.agent(agent).size() != static_cast<std::size_t>(log_weights_.size())) {
    throw InputError("GP-MW: state does not match the agent's action space");
  }
  const std::vector<double> ucb =
      UcbSlice(gp, joint, agent, realized_actions, beta);
  std::vector<double> losses(ucb.size());
  for (std::size_t i = 0; i < ucb.size(); ++i) {
    losses[i] = 1.0 - std::clamp(ucb[i], 0.0, 1.0);
  }
  GpMwState next = ApplyLosses(losses);
  MixedStrategy strategy = next.Strategy();
  return {std::move(next), std::move(strategy)};
}

double GpMwLearningRate(std::size_t domain_size, int horizon) {
  if (horizon < 1) throw InputError("GP-MW horizon must be >= 1");
  return std::sqrt(8.0 * std::log(static_cast<double>(domain_size)) / horizon);
}

// -- EXP3 ---------------------------------------------------------------------

Exp3State::Exp3State(const ActionSpace& space, const RandomFeatureMap& features,
                     double learning_rate, bool clamp_payoff)
    : phi_(static_cast<Eigen::Index>(space.size()), features.num_features()),
      log_weights_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()))),
      learning_rate_(learning_rate),
      clamp_payoff_(clamp_payoff),
      strategy_(MixedStrategy::Uniform(space.size())) {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw InputError("EXP3 learning rate must be finite and >= 0");
  }
  for (std::size_t i = 0; i < space.size(); ++i) {
    phi_.row(static_cast<Eigen::Index>(i)) = features.Features(space.point(i));
  }
  Refresh();
}

void Exp3State::Refresh() {
  const double n = static_cast<double>(log_weights_.size());
  const double gamma =
      std::min(1.0, std::sqrt(n * std::log(n) / static_cast<double>(round_)));
  const MixedStrategy exploit = StrategyFromLogWeights(log_weights_);
  std::vector<double> p(exploit.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = (1.0 - gamma) * exploit[i] + gamma / n;
  }
  strategy_ = MixedStrategy(std::move(p));
}

std::pair<Exp3State, MixedStrategy> Exp3State::Step(double observed_payoff,
                                                    ActionIndex played) const {
  if (played >= strategy_.size()) throw InputError("EXP3: played index out of range");
  if (!std::isfinite(observed_payoff)) throw InputError("EXP3: non-finite payoff");
  double payoff = observed_payoff;
  if (payoff < 0.0 || payoff > 1.0) {
    if (!clamp_payoff_) {
      throw InputError("EXP3: payoff outside [0,1] with clamping disabled");
    }
    payoff = std::clamp(payoff, 0.0, 1.0);
  }
  const double loss = 1.0 - payoff;

  const Eigen::Index d = phi_.cols();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < phi_.rows(); ++i) {
    q.noalias() += strategy_[static_cast<std::size_t>(i)] *
                   phi_.row(i).transpose() * phi_.row(i);
  }
  // Pseudo-inverse through the eigendecomposition; Q is singular whenever
  // the domain is smaller than the feature count.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double cutoff = 1e-10 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::VectorXd inv = ev;
  for (Eigen::Index i = 0; i < inv.size(); ++i) {
    inv(i) = ev(i) > cutoff ? 1.0 / ev(i) : 0.0;
  }
  const Eigen::MatrixXd q_pinv =
      eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  const Eigen::VectorXd theta =
      q_pinv * phi_.row(static_cast<Eigen::Index>(played)).transpose() * loss;

  Exp3State next(*this);
  next.log_weights_ -= learning_rate_ * (phi_ * theta);
  next.log_weights_.array() -= next.log_weights_.maxCoeff();
  next.round_ = round_ + 1;
  next.Refresh();
  MixedStrategy strategy = next.strategy_;
  return {std::move(next), std::move(strategy)};
}

double Exp3LearningRate(std::size_t domain_size, int num_features,
                        int horizon) {
  if (horizon < 1 || num_features < 1) {
    throw InputError("EXP3 learning rate needs positive horizon and features");
  }
  return std::sqrt(2.0 * std::log(static_cast<double>(domain_size)) /
                   (static_cast<double>(num_features) * horizon));
}

// -- Level-0 wrappers ---------------------------------------------------------

std::string Level0KindName(Level0Kind kind) {
  switch (kind) {
    case Level0Kind::kRandom:
      return "random";
    case Level0Kind::kExp3:
      return "exp3";
    case Level0Kind::kGpMw:
      return "gp_mw";
  }
  throw InternalError("unknown level-0 kind");
}

Level0Kind ParseLevel0Kind(const std::string& name) {
  if (name == "random") return Level0Kind::kRandom;
  if (name == "exp3") return Level0Kind::kExp3;
  if (name == "gp_mw" || name == "gpmw") return Level0Kind::kGpMw;
  throw InputError("unknown level-0 strategy '" + name +
                   "' (expected random, exp3 or gp_mw)");
}

std::string Level0Config::Key() const {
  std::ostringstream out;
  out.precision(17);
  out << Level0KindName(kind);
  if (learning_rate) out << ";eta=" << *learning_rate;
  if (kind == Level0Kind::kGpMw) out << ";anytime=" << anytime;
  if (kind == Level0Kind::kExp3) {
    out << ";features=" << num_features << ";clamp=" << clamp_payoff;
  }
  return out.str();
}

namespace {

class RandomSearch : public Level0Strategy {
 public:
  explicit RandomSearch(std::size_t n) : strategy_(MixedStrategy::Uniform(n)) {}
  const MixedStrategy& Current() const override { return strategy_; }
  void Observe(const Level0Feedback&) override {}
  std::unique_ptr<Level0Strategy> Clone() const override {
    return std::make_unique<RandomSearch>(*this);
  }

 private:
  MixedStrategy strategy_;
};

class GpMwLevel0 : public Level0Strategy {
 public:
  GpMwLevel0(std::size_t n, double eta, bool anytime)
      : state_(n, eta), anytime_(anytime), strategy_(state_.Strategy()) {}

  const MixedStrategy& Current() const override { return strategy_; }

  void Observe(const Level0Feedback& fb) override {
    if (anytime_) {
      state_ = state_.WithLearningRate(
          GpMwLearningRate(fb.joint.agent(fb.agent).size(), fb.t));
    }
    auto [next, strategy] =
        state_.Update(fb.posterior, fb.joint, fb.agent, fb.joint_actions, fb.beta);
    state_ = std::move(next);
    strategy_ = std::move(strategy);
  }

  std::unique_ptr<Level0Strategy> Clone() const override {
    return std::make_unique<GpMwLevel0>(*this);
  }

 private:
  GpMwState state_;
  bool anytime_;
  MixedStrategy strategy_;
};

class Exp3Level0 : public Level0Strategy {
 public:
  explicit Exp3Level0(Exp3State state) : state_(std::move(state)) {}

  const MixedStrategy& Current() const override { return state_.strategy(); }

  void Observe(const Level0Feedback& fb) override {
    state_ = state_.Step(fb.observed_payoff, fb.joint_actions[fb.agent]).first;
  }

  std::unique_ptr<Level0Strategy> Clone() const override {
    return std::make_unique<Exp3Level0>(*this);
  }

 private:
  Exp3State state_;
};

}  // namespace

std::unique_ptr<Level0Strategy> MakeLevel0(const Level0Config& config,
                                           const JointSpace& joint,
                                           std::size_t agent,
                                           const KernelSpec& kernel,
                                           int horizon,
                                           std::uint64_t feature_seed) {
  const ActionSpace& space = joint.agent(agent);
  switch (config.kind) {
    case Level0Kind::kRandom:
      return std::make_unique<RandomSearch>(space.size());
    case Level0Kind::kGpMw: {
      const double eta = config.learning_rate.value_or(
          config.anytime ? GpMwLearningRate(space.size(), 1)
                         : GpMwLearningRate(space.size(), horizon));
      return std::make_unique<GpMwLevel0>(space.size(), eta,
                                          config.anytime && !config.learning_rate);
    }
    case Level0Kind::kExp3: {
      const auto features =
          BuildFeatureMap(kernel, space.dim(), config.num_features, feature_seed);
      const double eta = config.learning_rate.value_or(
          Exp3LearningRate(space.size(), config.num_features, horizon));
      return std::make_unique<Exp3Level0>(
          Exp3State(space, features, eta, config.clamp_payoff));
    }
  }
  throw InternalError("unknown level-0 kind");
}

}  // namespace r2b2
