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

#ifndef R2B2_ACTION_SPACE_H_
#define R2B2_ACTION_SPACE_H_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace r2b2 {

// Index of an action inside one agent's discrete action space.
using ActionIndex = std::size_t;

// A finite set of points in [0,1]^dim. Point order is fixed at construction.
class ActionSpace {
 public:
  // `coords` holds size * dim values, row-major (one point per row).
  ActionSpace(int dim, std::vector<double> coords);

  // Equally spaced grid in [0,1]^d, d = points_per_axis.size(). Points are
  // enumerated row-major with the first axis varying slowest.
  static ActionSpace Grid(std::vector<int> points_per_axis);

  int dim() const { return dim_; }
  std::size_t size() const { return size_; }
  std::span<const double> point(ActionIndex i) const;

  bool is_grid() const { return !grid_shape_.empty(); }
  const std::vector<int>& grid_shape() const { return grid_shape_; }

 private:
  int dim_;
  std::size_t size_;
  std::vector<double> coords_;
  std::vector<int> grid_shape_;
};

// Evenly spaced values on [0,1]; a single point sits at 0.
std::vector<double> UnitLinspace(int n);

// Cartesian product of per-agent action spaces. Joint inputs are the
// concatenation of agent coordinates in agent order, and flat joint indices
// enumerate agent action tuples row-major (agent 0 slowest).
class JointSpace {
 public:
  explicit JointSpace(std::vector<ActionSpace> agents);

  std::size_t num_agents() const { return agents_.size(); }
  const ActionSpace& agent(std::size_t i) const { return agents_.at(i); }
  const std::vector<ActionSpace>& agents() const { return agents_; }
  std::size_t size() const { return size_; }
  int dim() const { return dim_; }
  int offset(std::size_t agent) const { return offsets_.at(agent); }

  std::size_t Flatten(std::span<const ActionIndex> actions) const;
  std::vector<ActionIndex> Unflatten(std::size_t flat) const;

  // Concatenated coordinates of a joint action.
  Eigen::VectorXd Point(std::span<const ActionIndex> actions) const;
  void FillPoint(std::span<const ActionIndex> actions, double* out) const;

  // All joint points, one per row, in flat-index order.
  const Eigen::MatrixXd& AllPoints() const { return all_points_; }

  // Every agent space is a grid, so the joint space is a product grid over
  // dim() axes.
  bool IsProductGrid() const;
  // Per-axis 1-D coordinates of the product grid, in concatenated order.
  std::vector<std::vector<double>> AxisCoordinates() const;

 private:
  std::vector<ActionSpace> agents_;
  std::vector<int> offsets_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
  int dim_ = 0;
  Eigen::MatrixXd all_points_;
};

}  // namespace r2b2

#endif  // R2B2_ACTION_SPACE_H_
