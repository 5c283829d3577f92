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

#ifndef R2B2_TESTS_TEST_UTIL_H_
#define R2B2_TESTS_TEST_UTIL_H_

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "r2b2/action_space.h"
#include "r2b2/gp.h"
#include "r2b2/kernel.h"
#include "r2b2/level0.h"
#include "r2b2/rng.h"

namespace r2b2::testing {

// Posterior mean/variance through an explicit inverse of the regularized
// Gram matrix. Independent of the Cholesky machinery under test.
inline Prediction DenseOracle(const KernelSpec& k, double noise,
                              const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y,
                              const Eigen::VectorXd& z) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd gram(n, n);
  Eigen::VectorXd cross(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      gram(i, j) = KernelFromSquaredDistance(k, (x.row(i) - x.row(j)).squaredNorm());
    }
    gram(i, i) += noise;
    cross(i) = KernelFromSquaredDistance(k, (x.row(i) - z.transpose()).squaredNorm());
  }
  const Eigen::MatrixXd inv = gram.fullPivLu().inverse();
  Prediction p;
  p.mean = cross.dot(inv * y);
  p.variance = std::max(0.0, k.signal_variance - cross.dot(inv * cross));
  return p;
}

// Random history of joint actions drawn uniformly from `joint` with standard
// normal payoffs.
struct History {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd outputs;
  std::vector<std::vector<ActionIndex>> actions;
};

inline History RandomHistory(const JointSpace& joint, int n, Rng& rng) {
  History h;
  h.inputs.resize(n, joint.dim());
  h.outputs.resize(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    std::vector<ActionIndex> a(joint.num_agents());
    for (std::size_t j = 0; j < a.size(); ++j) {
      a[j] = std::uniform_int_distribution<std::size_t>(0, joint.agent(j).size() - 1)(rng);
    }
    h.inputs.row(i) = joint.Point(a).transpose();
    h.outputs(i) = normal(rng);
    h.actions.push_back(std::move(a));
  }
  return h;
}

inline GpPosterior Incremental(const KernelSpec& k, double noise,
                               const History& h) {
  GpPosterior gp(k, noise, static_cast<int>(h.inputs.cols()));
  for (Eigen::Index i = 0; i < h.inputs.rows(); ++i) {
    const Eigen::VectorXd row = h.inputs.row(i).transpose();
    gp = gp.Condition(std::span<const double>(row.data(), row.size()), h.outputs(i));
  }
  return gp;
}

inline MixedStrategy RandomStrategy(std::size_t n, Rng& rng,
                                    double zero_prob = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(n);
  for (auto& v : p) v = u(rng) < zero_prob ? 0.0 : u(rng);
  p[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)] += 0.1;
  return MixedStrategy(std::move(p));
}

inline JointSpace TwoAgentGrid(int n1, int n2) {
  return JointSpace({ActionSpace::Grid({n1}), ActionSpace::Grid({n2})});
}

}  // namespace r2b2::testing

#endif  // R2B2_TESTS_TEST_UTIL_H_
