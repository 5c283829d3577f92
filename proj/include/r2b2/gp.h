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

#ifndef R2B2_GP_H_
#define R2B2_GP_H_

#include <span>

#include <Eigen/Dense>

#include "r2b2/kernel.h"

namespace r2b2 {

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

// Jitter policy for Gram factorizations: start at kJitterStart * sv, grow
// tenfold per failure, give up beyond kJitterMax * sv.
inline constexpr double kJitterStart = 1e-8;
inline constexpr double kJitterMax = 1e-4;

struct JitteredCholesky {
  Eigen::MatrixXd lower;
  double jitter = 0.0;  // absolute amount added to the diagonal
};

// Cholesky factor of `gram` (+ jitter on failure). `first_jitter` is the
// first amount tried; 0 means try the plain matrix first.
JitteredCholesky FactorizeWithJitter(Eigen::MatrixXd gram,
                                     double signal_variance,
                                     double first_jitter);

// Zero-mean GP posterior conditioned on a history of joint-action inputs and
// noisy payoffs. Values are immutable; Condition() returns a new posterior.
//
// Holds the lower Cholesky factor L of K_T + (noise + jitter) I and
// alpha = (K_T + (noise + jitter) I)^{-1} y_T. Appending an observation
// extends L by one bordered row; every kRefactorInterval appends the factor is
// recomputed from scratch.
class GpPosterior {
 public:
  static constexpr int kRefactorInterval = 64;

  GpPosterior(KernelSpec kernel, double noise_variance, int input_dim);

  // Batch construction: one full factorization of the whole history.
  static GpPosterior FromHistory(KernelSpec kernel, double noise_variance,
                                 const Eigen::MatrixXd& inputs,
                                 const Eigen::VectorXd& outputs);

  GpPosterior Condition(std::span<const double> z, double y) const;

  Prediction Predict(std::span<const double> z) const;

  // Means and variances at every row of `points` through one shared
  // triangular solve.
  void PredictBatch(const Eigen::MatrixXd& points, Eigen::VectorXd* mean,
                    Eigen::VectorXd* variance) const;

  const KernelSpec& kernel() const { return kernel_; }
  double noise_variance() const { return noise_variance_; }
  double jitter() const { return jitter_; }
  int input_dim() const { return input_dim_; }
  Eigen::Index num_observations() const { return outputs_.size(); }
  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& outputs() const { return outputs_; }
  const Eigen::MatrixXd& factor() const { return lower_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }

 private:
  void Refactorize();
  void SolveAlpha();
  void CheckCurrent() const;

  KernelSpec kernel_;
  double noise_variance_;
  int input_dim_;
  double jitter_ = 0.0;
  int appends_since_refactor_ = 0;
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd outputs_;
  Eigen::MatrixXd lower_;
  Eigen::VectorXd alpha_;
};

}  // namespace r2b2

#endif  // R2B2_GP_H_
