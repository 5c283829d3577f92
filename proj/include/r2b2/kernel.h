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

#ifndef R2B2_KERNEL_H_
#define R2B2_KERNEL_H_

#include <span>
#include <string>

#include <Eigen/Dense>

namespace r2b2 {

enum class KernelFamily { kSquaredExponential, kMatern32, kMatern52 };

std::string KernelFamilyName(KernelFamily family);
KernelFamily ParseKernelFamily(const std::string& name);

// Stationary isotropic kernel over joint inputs. k(z, z) == signal_variance.
struct KernelSpec {
  KernelFamily family = KernelFamily::kSquaredExponential;
  double length_scale = 0.1;
  double signal_variance = 1.0;

  void Validate() const;
};

// Kernel value as a function of squared Euclidean distance.
double KernelFromSquaredDistance(const KernelSpec& spec, double sq_dist);

double KernelEval(const KernelSpec& spec, std::span<const double> z,
                  std::span<const double> z2);

// Cross-covariance between the rows of `a` and the rows of `b`.
Eigen::MatrixXd KernelMatrix(const KernelSpec& spec, const Eigen::MatrixXd& a,
                             const Eigen::MatrixXd& b);

}  // namespace r2b2

#endif  // R2B2_KERNEL_H_
