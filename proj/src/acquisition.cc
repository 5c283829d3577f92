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

#include "r2b2/acquisition.h"

#include <cmath>
#include <numbers>
#include <string>

#include "r2b2/errors.h"

namespace r2b2 {
namespace {

void CheckBeta(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw InputError("UCB weight beta must be finite and nonnegative");
  }
}

}  // namespace

void BetaSchedule::Validate() const {
  if (domain_size == 0) throw InputError("beta schedule: empty domain");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InputError("beta schedule: delta must lie in (0,1)");
  }
}

double Beta(const BetaSchedule& schedule, int t) {
  schedule.Validate();
  if (t < 1) {
    throw InputError("beta schedule: iteration must be >= 1, got " +
                     std::to_string(t));
  }
  const double c = schedule.tight ? 6.0 : 3.0;
  const double tt = static_cast<double>(t);
  return 2.0 * std::log(static_cast<double>(schedule.domain_size) * tt * tt *
                        std::numbers::pi * std::numbers::pi /
                        (c * schedule.delta));
}

double Ucb(const GpPosterior& gp, std::span<const double> z, double beta) {
  CheckBeta(beta);
  const Prediction p = gp.Predict(z);
  return p.mean + std::sqrt(beta) * std::sqrt(p.variance);
}

Eigen::VectorXd UcbBatch(const GpPosterior& gp, const Eigen::MatrixXd& points,
                         double beta) {
  CheckBeta(beta);
  Eigen::VectorXd mean, var;
  gp.PredictBatch(points, &mean, &var);
  return mean.array() + std::sqrt(beta) * var.array().sqrt();
}

std::vector<double> UcbSlice(const GpPosterior& gp, const JointSpace& joint,
                             std::size_t agent,
                             std::span<const ActionIndex> joint_actions,
                             double beta) {
  if (agent >= joint.num_agents()) throw InputError("UcbSlice: bad agent");
  if (joint_actions.size() != joint.num_agents()) {
    throw InputError("UcbSlice: expected one action per agent");
  }
  if (gp.input_dim() != joint.dim()) {
    throw InputError("UcbSlice: posterior dimension does not match joint space");
  }
  const ActionSpace& own = joint.agent(agent);
  std::vector<ActionIndex> actions(joint_actions.begin(), joint_actions.end());
  Eigen::MatrixXd points(static_cast<Eigen::Index>(own.size()), joint.dim());
  std::vector<double> row(joint.dim());
  for (std::size_t i = 0; i < own.size(); ++i) {
    actions[agent] = i;
    joint.FillPoint(actions, row.data());
    for (int d = 0; d < joint.dim(); ++d) {
      points(static_cast<Eigen::Index>(i), d) = row[d];
    }
  }
  const Eigen::VectorXd u = UcbBatch(gp, points, beta);
  return {u.data(), u.data() + u.size()};
}

Eigen::VectorXd UcbGrid(const GpPosterior& gp, const JointSpace& joint,
                        double beta) {
  if (gp.input_dim() != joint.dim()) {
    throw InputError("UcbGrid: posterior dimension does not match joint space");
  }
  return UcbBatch(gp, joint.AllPoints(), beta);
}

std::size_t ArgmaxLowest(std::span<const double> values) {
  if (values.empty()) throw InputError("argmax of an empty set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace r2b2
