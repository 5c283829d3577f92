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

#ifndef R2B2_ACQUISITION_H_
#define R2B2_ACQUISITION_H_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "r2b2/action_space.h"
#include "r2b2/gp.h"

namespace r2b2 {

// Confidence-width schedule beta_t = 2 ln(|X| t^2 pi^2 / (c delta)), with
// c = 3 by default and c = 6 for the tighter variant.
struct BetaSchedule {
  std::size_t domain_size = 1;
  double delta = 0.1;
  bool tight = false;

  void Validate() const;
};

double Beta(const BetaSchedule& schedule, int t);

// mu(z) + sqrt(beta) * sigma(z).
double Ucb(const GpPosterior& gp, std::span<const double> z, double beta);

// UCB at every row of `points`.
Eigen::VectorXd UcbBatch(const GpPosterior& gp, const Eigen::MatrixXd& points,
                         double beta);

// UCB over agent `agent`'s own actions with every other agent fixed at
// `joint_actions` (the entry for `agent` itself is ignored). Element i
// corresponds to own action i.
std::vector<double> UcbSlice(const GpPosterior& gp, const JointSpace& joint,
                             std::size_t agent,
                             std::span<const ActionIndex> joint_actions,
                             double beta);

// UCB at every joint action, in flat-index order.
Eigen::VectorXd UcbGrid(const GpPosterior& gp, const JointSpace& joint,
                        double beta);

// Index of the largest value; ties go to the lowest index.
std::size_t ArgmaxLowest(std::span<const double> values);

}  // namespace r2b2

#endif  // R2B2_ACQUISITION_H_
