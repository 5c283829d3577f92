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

#include "r2b2/kernel.h"

#include <cmath>

#include "r2b2/errors.h"

namespace r2b2 {

std::string KernelFamilyName(KernelFamily family) {
  switch (family) {
    case KernelFamily::kSquaredExponential:
      return "se";
    case KernelFamily::kMatern32:
      return "matern32";
    case KernelFamily::kMatern52:
      return "matern52";
  }
  throw InternalError("unknown kernel family");
}

KernelFamily ParseKernelFamily(const std::string& name) {
  if (name == "se" || name == "squared_exponential") {
    return KernelFamily::kSquaredExponential;
  }
  if (name == "matern32") return KernelFamily::kMatern32;
  if (name == "matern52") return KernelFamily::kMatern52;
  throw InputError("unknown kernel family '" + name +
                   "' (expected se, matern32 or matern52)");
}

void KernelSpec::Validate() const {
  if (!(length_scale > 0.0) || !std::isfinite(length_scale)) {
    throw InputError("kernel length_scale must be positive");
  }
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw InputError("kernel signal_variance must be positive");
  }
}

double KernelFromSquaredDistance(const KernelSpec& spec, double sq_dist) {
  const double l = spec.length_scale;
  switch (spec.family) {
    case KernelFamily::kSquaredExponential:
      return spec.signal_variance * std::exp(-0.5 * sq_dist / (l * l));
    case KernelFamily::kMatern32: {
      const double s = std::sqrt(3.0 * sq_dist) / l;
      return spec.signal_variance * (1.0 + s) * std::exp(-s);
    }
    case KernelFamily::kMatern52: {
      const double s = std::sqrt(5.0 * sq_dist) / l;
      return spec.signal_variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
    }
  }
  throw InternalError("unknown kernel family");
}

double KernelEval(const KernelSpec& spec, std::span<const double> z,
                  std::span<const double> z2) {
  if (z.size() != z2.size()) {
    throw InputError("KernelEval: dimension mismatch (" +
                     std::to_string(z.size()) + " vs " +
                     std::to_string(z2.size()) + ")");
  }
  double sq = 0.0;
  for (std::size_t d = 0; d < z.size(); ++d) {
    const double diff = z[d] - z2[d];
    sq += diff * diff;
  }
  return KernelFromSquaredDistance(spec, sq);
}

Eigen::MatrixXd KernelMatrix(const KernelSpec& spec, const Eigen::MatrixXd& a,
                             const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) throw InputError("KernelMatrix: dimension mismatch");
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out(i, j) = KernelFromSquaredDistance(spec, (a.row(i) - b.row(j)).squaredNorm());
    }
  }
  return out;
}

}  // namespace r2b2
