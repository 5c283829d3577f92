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

#include "r2b2/gp.h"

#include <cmath>
#include <sstream>
#include <vector>

#include "r2b2/errors.h"

namespace r2b2 {

JitteredCholesky FactorizeWithJitter(Eigen::MatrixXd gram,
                                     double signal_variance,
                                     double first_jitter) {
  const double start = kJitterStart * signal_variance;
  const double cap = kJitterMax * signal_variance * (1.0 + 1e-9);
  double jitter = first_jitter;
  for (;;) {
    Eigen::MatrixXd a = gram;
    a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd lower = llt.matrixL();
      const auto diag = lower.diagonal().array();
      if ((diag > 0.0).all() && diag.isFinite().all()) {
        return {std::move(lower), jitter};
      }
    }
    jitter = jitter <= 0.0 ? start : jitter * 10.0;
    if (jitter > cap) {
      std::ostringstream msg;
      msg << "Gram matrix of size " << gram.rows()
          << " is not positive definite after jitter up to "
          << kJitterMax * signal_variance;
      throw NumericalError(msg.str());
    }
  }
}

GpPosterior::GpPosterior(KernelSpec kernel, double noise_variance,
                         int input_dim)
    : kernel_(kernel),
      noise_variance_(noise_variance),
      input_dim_(input_dim),
      inputs_(0, input_dim),
      outputs_(0),
      lower_(0, 0),
      alpha_(0) {
  kernel_.Validate();
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw InputError("noise variance must be nonnegative");
  }
  if (input_dim <= 0) throw InputError("GP input dimension must be positive");
}

GpPosterior GpPosterior::FromHistory(KernelSpec kernel, double noise_variance,
                                     const Eigen::MatrixXd& inputs,
                                     const Eigen::VectorXd& outputs) {
  if (inputs.rows() != outputs.size()) {
    throw InputError("FromHistory: inputs and outputs differ in length");
  }
  GpPosterior gp(kernel, noise_variance, static_cast<int>(inputs.cols()));
  gp.inputs_ = inputs;
  gp.outputs_ = outputs;
  gp.Refactorize();
  return gp;
}

void GpPosterior::Refactorize() {
  Eigen::MatrixXd gram = KernelMatrix(kernel_, inputs_, inputs_);
  gram.diagonal().array() += noise_variance_;
  auto chol = FactorizeWithJitter(std::move(gram), kernel_.signal_variance,
                                  jitter_);
  lower_ = std::move(chol.lower);
  jitter_ = chol.jitter;
  appends_since_refactor_ = 0;
  SolveAlpha();
}

void GpPosterior::SolveAlpha() {
  alpha_ = lower_.triangularView<Eigen::Lower>().solve(outputs_);
  lower_.transpose().triangularView<Eigen::Upper>().solveInPlace(alpha_);
}

GpPosterior GpPosterior::Condition(std::span<const double> z, double y) const {
  if (static_cast<int>(z.size()) != input_dim_) {
    throw InputError("Condition: input dimension mismatch");
  }
  if (!std::isfinite(y)) throw InputError("Condition: non-finite payoff");
  CheckCurrent();

  GpPosterior next(*this);
  const Eigen::Index n = outputs_.size();
  const Eigen::Map<const Eigen::RowVectorXd> row(z.data(), input_dim_);
  next.inputs_.conservativeResize(n + 1, Eigen::NoChange);
  next.inputs_.row(n) = row;
  next.outputs_.conservativeResize(n + 1);
  next.outputs_(n) = y;

  if (appends_since_refactor_ + 1 >= kRefactorInterval) {
    next.Refactorize();
    return next;
  }

  Eigen::VectorXd cross(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cross(i) = KernelFromSquaredDistance(
        kernel_, (inputs_.row(i) - row).squaredNorm());
  }
  const Eigen::VectorXd border =
      n > 0 ? Eigen::VectorXd(lower_.triangularView<Eigen::Lower>().solve(cross))
            : Eigen::VectorXd(0);
  const double pivot = kernel_.signal_variance + noise_variance_ + jitter_ -
                       border.squaredNorm();
  if (!(pivot > 1e-10 * kernel_.signal_variance) || !std::isfinite(pivot)) {
    next.Refactorize();
    return next;
  }
  next.lower_.conservativeResize(n + 1, n + 1);
  next.lower_.col(n).setZero();
  next.lower_.row(n).head(n) = border.transpose();
  next.lower_(n, n) = std::sqrt(pivot);
  next.appends_since_refactor_ = appends_since_refactor_ + 1;
  next.SolveAlpha();
  return next;
}

void GpPosterior::CheckCurrent() const {
  const Eigen::Index n = outputs_.size();
  if (inputs_.rows() != n || lower_.rows() != n || lower_.cols() != n ||
      alpha_.size() != n) {
    throw InternalError("GpPosterior: factorization is stale");
  }
}

Prediction GpPosterior::Predict(std::span<const double> z) const {
  if (static_cast<int>(z.size()) != input_dim_) {
    throw InputError("Predict: input dimension mismatch");
  }
  CheckCurrent();
  const double prior = KernelEval(kernel_, z, z);
  const Eigen::Index n = outputs_.size();
  if (n == 0) return {0.0, prior};
  std::vector<double> x(input_dim_);
  Eigen::VectorXd cross(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int d = 0; d < input_dim_; ++d) x[d] = inputs_(i, d);
    cross(i) = KernelEval(kernel_, z, x);
  }
  const Eigen::VectorXd v = lower_.triangularView<Eigen::Lower>().solve(cross);
  const double variance = prior - v.squaredNorm();
  return {cross.dot(alpha_), variance > 0.0 ? variance : 0.0};
}

void GpPosterior::PredictBatch(const Eigen::MatrixXd& points,
                               Eigen::VectorXd* mean,
                               Eigen::VectorXd* variance) const {
  if (points.cols() != input_dim_) {
    throw InputError("PredictBatch: input dimension mismatch");
  }
  CheckCurrent();
  const Eigen::Index m = points.rows();
  const double prior = kernel_.signal_variance;
  if (outputs_.size() == 0) {
    if (mean) mean->setZero(m);
    if (variance) variance->setConstant(m, prior);
    return;
  }
  const Eigen::MatrixXd cross = KernelMatrix(kernel_, inputs_, points);  // n x m
  if (mean) *mean = cross.transpose() * alpha_;
  if (variance) {
    const Eigen::MatrixXd v = lower_.triangularView<Eigen::Lower>().solve(cross);
    *variance = (prior - v.colwise().squaredNorm().array()).max(0.0).matrix().transpose();
  }
}

}  // namespace r2b2
