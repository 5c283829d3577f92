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

#include "r2b2/action_space.h"

#include <string>

#include "r2b2/errors.h"

namespace r2b2 {

ActionSpace::ActionSpace(int dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim_ <= 0) throw InputError("ActionSpace: dim must be positive");
  if (coords_.empty() || coords_.size() % dim_ != 0) {
    throw InputError("ActionSpace: coordinate count " +
                     std::to_string(coords_.size()) +
                     " is not a positive multiple of dim " +
                     std::to_string(dim_));
  }
  for (double c : coords_) {
    if (!(c >= 0.0 && c <= 1.0)) {
      throw InputError("ActionSpace: coordinates must lie in [0,1]");
    }
  }
  size_ = coords_.size() / dim_;
}

std::vector<double> UnitLinspace(int n) {
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n && n > 1; ++i) {
    out[i] = static_cast<double>(i) / (n - 1);
  }
  return out;
}

ActionSpace ActionSpace::Grid(std::vector<int> points_per_axis) {
  if (points_per_axis.empty()) throw InputError("Grid: no axes");
  std::size_t total = 1;
  for (int n : points_per_axis) {
    if (n <= 0) throw InputError("Grid: points per axis must be positive");
    total *= static_cast<std::size_t>(n);
  }
  const int dim = static_cast<int>(points_per_axis.size());
  std::vector<std::vector<double>> axes;
  for (int n : points_per_axis) axes.push_back(UnitLinspace(n));

  std::vector<double> coords(total * dim);
  std::vector<int> idx(dim, 0);
  for (std::size_t p = 0; p < total; ++p) {
    for (int d = 0; d < dim; ++d) coords[p * dim + d] = axes[d][idx[d]];
    for (int d = dim - 1; d >= 0; --d) {
      if (++idx[d] < points_per_axis[d]) break;
      idx[d] = 0;
    }
  }
  ActionSpace space(dim, std::move(coords));
  space.grid_shape_ = std::move(points_per_axis);
  return space;
}

std::span<const double> ActionSpace::point(ActionIndex i) const {
  if (i >= size_) throw InputError("ActionSpace: index out of range");
  return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)};
}

JointSpace::JointSpace(std::vector<ActionSpace> agents)
    : agents_(std::move(agents)) {
  if (agents_.empty()) throw InputError("JointSpace: no agents");
  offsets_.resize(agents_.size());
  strides_.resize(agents_.size());
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    offsets_[i] = dim_;
    dim_ += agents_[i].dim();
    size_ *= agents_[i].size();
  }
  std::size_t stride = 1;
  for (std::size_t i = agents_.size(); i-- > 0;) {
    strides_[i] = stride;
    stride *= agents_[i].size();
  }
  all_points_.resize(static_cast<Eigen::Index>(size_), dim_);
  std::vector<double> row(dim_);
  for (std::size_t flat = 0; flat < size_; ++flat) {
    const auto actions = Unflatten(flat);
    FillPoint(actions, row.data());
    for (int d = 0; d < dim_; ++d) all_points_(flat, d) = row[d];
  }
}

std::size_t JointSpace::Flatten(std::span<const ActionIndex> actions) const {
  if (actions.size() != agents_.size()) {
    throw InputError("JointSpace: expected one action per agent");
  }
  std::size_t flat = 0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] >= agents_[i].size()) {
      throw InputError("JointSpace: action index out of range for agent " +
                       std::to_string(i));
    }
    flat += actions[i] * strides_[i];
  }
  return flat;
}

std::vector<ActionIndex> JointSpace::Unflatten(std::size_t flat) const {
  if (flat >= size_) throw InputError("JointSpace: flat index out of range");
  std::vector<ActionIndex> out(agents_.size());
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    out[i] = flat / strides_[i];
    flat %= strides_[i];
  }
  return out;
}

void JointSpace::FillPoint(std::span<const ActionIndex> actions,
                           double* out) const {
  if (actions.size() != agents_.size()) {
    throw InputError("JointSpace: expected one action per agent");
  }
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const auto p = agents_[i].point(actions[i]);
    for (std::size_t d = 0; d < p.size(); ++d) out[offsets_[i] + d] = p[d];
  }
}

Eigen::VectorXd JointSpace::Point(std::span<const ActionIndex> actions) const {
  Eigen::VectorXd z(dim_);
  FillPoint(actions, z.data());
  return z;
}

bool JointSpace::IsProductGrid() const {
  for (const auto& a : agents_) {
    if (!a.is_grid()) return false;
  }
  return true;
}

std::vector<std::vector<double>> JointSpace::AxisCoordinates() const {
  if (!IsProductGrid()) {
    throw InputError("JointSpace: axis coordinates need grid action spaces");
  }
  std::vector<std::vector<double>> axes;
  for (const auto& a : agents_) {
    for (int n : a.grid_shape()) axes.push_back(UnitLinspace(n));
  }
  return axes;
}

}  // namespace r2b2
