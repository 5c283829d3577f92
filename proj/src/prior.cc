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

#include "r2b2/prior.h"

#include <random>
#include <string>
#include <vector>

#include "r2b2/errors.h"
#include "r2b2/gp.h"
#include "r2b2/rng.h"

namespace r2b2 {
namespace {

bool KroneckerAvailable(const KernelSpec& spec, const JointSpace& space) {
  return spec.family == KernelFamily::kSquaredExponential &&
         space.IsProductGrid();
}

Eigen::VectorXd ApplyDense(const KernelSpec& spec, const JointSpace& space,
                           const Eigen::VectorXd& normals) {
  if (space.size() > kDensePriorCap) {
    throw BudgetError("dense prior sampling supports at most " +
                      std::to_string(kDensePriorCap) + " joint points, got " +
                      std::to_string(space.size()));
  }
  const auto& pts = space.AllPoints();
  auto chol = FactorizeWithJitter(KernelMatrix(spec, pts, pts),
                                  spec.signal_variance,
                                  kJitterStart * spec.signal_variance);
  return chol.lower.triangularView<Eigen::Lower>() * normals;
}

// (L_0 kron L_1 kron ... kron L_{D-1}) e, with e laid out row-major over the
// axes (axis 0 slowest), applied one mode at a time.
Eigen::VectorXd ApplyKronecker(const KernelSpec& spec, const JointSpace& space,
                               const Eigen::VectorXd& normals) {
  const auto axes = space.AxisCoordinates();
  std::vector<Eigen::MatrixXd> factors;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    const auto& c = axes[a];
    const Eigen::Index n = static_cast<Eigen::Index>(c.size());
    Eigen::MatrixXd gram(n, n);
    // Signal variance lives entirely in the first factor.
    KernelSpec axis_spec = spec;
    if (a > 0) axis_spec.signal_variance = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double d = c[i] - c[j];
        gram(i, j) = KernelFromSquaredDistance(axis_spec, d * d);
      }
    }
    auto chol = FactorizeWithJitter(std::move(gram), axis_spec.signal_variance,
                                    kJitterStart * axis_spec.signal_variance);
    factors.push_back(std::move(chol.lower));
  }

  Eigen::VectorXd x = normals;
  Eigen::VectorXd y(x.size());
  std::size_t outer = 1;
  for (std::size_t a = 0; a < factors.size(); ++a) {
    const std::size_t n = axes[a].size();
    const std::size_t inner = static_cast<std::size_t>(x.size()) / (outer * n);
    const auto& l = factors[a];
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < n; ++i) {
        double* out = y.data() + (o * n + i) * inner;
        for (std::size_t k = 0; k < inner; ++k) out[k] = 0.0;
        for (std::size_t j = 0; j <= i; ++j) {
          const double lij = l(static_cast<Eigen::Index>(i),
                               static_cast<Eigen::Index>(j));
          const double* in = x.data() + (o * n + j) * inner;
          for (std::size_t k = 0; k < inner; ++k) out[k] += lij * in[k];
        }
      }
    }
    std::swap(x, y);
    outer *= n;
  }
  return x;
}

}  // namespace

Eigen::VectorXd ApplyPriorFactor(const KernelSpec& spec,
                                 const JointSpace& space,
                                 const Eigen::VectorXd& normals,
                                 PriorRoute route) {
  spec.Validate();
  if (normals.size() != static_cast<Eigen::Index>(space.size())) {
    throw InputError("ApplyPriorFactor: normal vector has wrong length");
  }
  if (route == PriorRoute::kAuto) {
    route = KroneckerAvailable(spec, space) ? PriorRoute::kKronecker
                                            : PriorRoute::kDense;
  }
  if (route == PriorRoute::kKronecker) {
    if (!KroneckerAvailable(spec, space)) {
      throw InputError(
          "Kronecker prior route needs an SE kernel on a product grid");
    }
    return ApplyKronecker(spec, space, normals);
  }
  return ApplyDense(spec, space, normals);
}

Eigen::VectorXd SamplePrior(const KernelSpec& spec, const JointSpace& space,
                            std::uint64_t seed, PriorRoute route) {
  Rng rng = MakeRng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd e(static_cast<Eigen::Index>(space.size()));
  for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = normal(rng);
  return ApplyPriorFactor(spec, space, e, route);
}

}  // namespace r2b2
