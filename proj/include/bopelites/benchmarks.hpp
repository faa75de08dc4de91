// Copyright 2026 The bopelites Authors. All Rights Reserved.
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
// =============================================================================

#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "bopelites/problem.hpp"

namespace bope {

struct ObjectiveAndDescriptors {
  double y = 0.0;
  Eigen::VectorXd b;
};

/// Mishra's bird on x1 in [-10,0], x2 in [-6.5,0] with descriptors (-x1, -x2).
/// Throws std::domain_error outside the box.
ObjectiveAndDescriptors mishra(double x1, double x2);

/// Global minimum of mishra() on its box, at (-3.1302468, -1.5821422).
inline constexpr double kMishraMinimum = -106.76453674926475;

/// Planar arm with four unit-interval joints. Objective penalises the spread of
/// the joint values; descriptors are the end-effector position in [0,1]^2.
ObjectiveAndDescriptors robot_arm(const Eigen::VectorXd& x);

/// Six-dimensional Rosenbrock-style objective on [0,1]^6 (maximised as-is).
ObjectiveAndDescriptors rosenbrock6(const Eigen::VectorXd& x);

/// Objective is mishra() - kMishraMinimum, which is non-negative.
Problem mishra_problem();
Problem robot_arm_problem();
Problem rosenbrock6_problem();

/// 2-d shifted Mishra rescaled to the unit square, descriptors equal to the inputs,
/// and invalid inside the disk of radius 0.2 around (0.3, 0.3).
Problem invalid_disk_problem();

struct SyntheticGpSpec {
  std::uint64_t seed = 0;
  int input_dim = 10;
  int descriptor_count = 1;
  int anchor_count = 300;
  int probe_count = 100000;
  double lengthscale_min = 0.1;
  double lengthscale_max = 1.0;
};

/// Deterministic functions drawn from a Matérn-5/2 GP prior: each is the
/// posterior mean conditioned on a joint prior sample at Sobol anchors.
/// Descriptor bounds are the empirical range over Sobol probes.
Problem synthetic_gp_problem(const SyntheticGpSpec& spec);

/// Resolves "mishra", "robot_arm", "rosenbrock6", "invalid_disk",
/// "synthetic_gp:<seed>" and "synthetic_gp:<seed>:<descriptor count>".
Problem make_problem(const std::string& id);

}  // namespace bope
