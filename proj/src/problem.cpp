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

#include "bopelites/problem.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bope {

bool Box::contains(const Eigen::VectorXd& x) const {
  if (x.size() != lower.size()) return false;
  return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

Eigen::VectorXd Box::to_unit(const Eigen::VectorXd& x) const {
  return ((x - lower).array() / (upper - lower).array()).matrix();
}

Eigen::VectorXd Box::from_unit(const Eigen::VectorXd& u) const {
  Eigen::VectorXd x = lower + (u.array() * (upper - lower).array()).matrix();
  return x.cwiseMax(lower).cwiseMin(upper);
}

Evaluation Problem::evaluate(const Eigen::VectorXd& x) const {
  Evaluation e;
  try {
    if (validity && !validity(x)) {
      e.valid = false;
      e.y = std::numeric_limits<double>::quiet_NaN();
      return e;
    }
    e.y = objective(x);
    e.b = descriptors(x);
    e.valid = std::isfinite(e.y) && e.b.allFinite();
  } catch (const std::exception&) {
    e.valid = false;
  }
  if (!e.valid) {
    e.y = std::numeric_limits<double>::quiet_NaN();
    e.b.resize(0);
  }
  return e;
}

Eigen::MatrixXd Problem::descriptors_unit(const Eigen::MatrixXd& unit_points) const {
  Eigen::MatrixXd out(unit_points.rows(), descriptor_dim());
  for (Eigen::Index i = 0; i < unit_points.rows(); ++i)
    out.row(i) = descriptors(input_box.from_unit(unit_points.row(i).transpose())).transpose();
  return out;
}

RegionGrid Problem::grid(const std::vector<int>& partitions) const {
  return RegionGrid(descriptor_box.lower, descriptor_box.upper, partitions);
}

Problem counting(const Problem& problem, const EvaluationCounter& counter) {
  Problem p = problem;
  auto obj = problem.objective;
  auto desc = problem.descriptors;
  auto objective_calls = counter.objective_calls;
  auto descriptor_calls = counter.descriptor_calls;
  p.objective = [obj, objective_calls](const Eigen::VectorXd& x) {
    ++*objective_calls;
    return obj(x);
  };
  p.descriptors = [desc, descriptor_calls](const Eigen::VectorXd& x) {
    ++*descriptor_calls;
    return desc(x);
  };
  auto valid = problem.validity;
  auto evaluation_calls = counter.evaluation_calls;
  p.validity = [valid, evaluation_calls](const Eigen::VectorXd& x) {
    ++*evaluation_calls;
    return valid ? valid(x) : true;
  };
  return p;
}

}  // namespace bope
