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

#ifndef R2B2_PRIOR_H_
#define R2B2_PRIOR_H_

#include <cstdint>

#include <Eigen/Dense>

#include "r2b2/action_space.h"
#include "r2b2/kernel.h"

namespace r2b2 {

// Largest joint space for which the dense Gram route is attempted
// (a 4096^2 double matrix is 128 MiB).
inline constexpr std::size_t kDensePriorCap = 4096;

enum class PriorRoute {
  kAuto,       // Kronecker when available, dense otherwise
  kDense,      // Cholesky of the full joint Gram matrix
  kKronecker,  // SE on a product grid: Kronecker product of per-axis factors
};

// One draw of the zero-mean GP prior at every joint point, indexed by flat
// joint index. f = L e with L a (jittered) Cholesky factor of the Gram matrix
// and e i.i.d. standard normals generated from `seed` in flat-index order,
// so both routes consume the same normals.
//
// The SE kernel on a product grid factorizes across axes, so its Gram matrix
// is the Kronecker product of 1-D Gram matrices and its Cholesky factor is
// the Kronecker product of their factors, so a 100x100 joint grid costs two
// 100x100 factorizations.
Eigen::VectorXd SamplePrior(const KernelSpec& spec, const JointSpace& space,
                            std::uint64_t seed,
                            PriorRoute route = PriorRoute::kAuto);

// Applies the Gram factor of `spec` over `space` to a given normal vector.
// Exposed so the two routes can be compared on identical inputs.
Eigen::VectorXd ApplyPriorFactor(const KernelSpec& spec,
                                 const JointSpace& space,
                                 const Eigen::VectorXd& normals,
                                 PriorRoute route);

}  // namespace r2b2

#endif  // R2B2_PRIOR_H_
