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

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bopelites/archive.hpp"

namespace bope {

/// Axis-aligned box.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Eigen::VectorXd& x) const;
  /// Min-max normalisation into [0,1]^d.
  Eigen::VectorXd to_unit(const Eigen::VectorXd& x) const;
  /// Inverse of to_unit, clamped to the box.
  Eigen::VectorXd from_unit(const Eigen::VectorXd& u) const;
};

struct Evaluation {
  double y = 0.0;
  Eigen::VectorXd b;
  bool valid = true;
};

/// A benchmark: objective, descriptors and validity over a box domain.
///
/// Evaluators take natural coordinates and must be deterministic. An
/// evaluator that throws yields an invalid evaluation.
class Problem {
 public:
  std::string id;
  Box input_box;
  Box descriptor_box;
  std::function<double(const Eigen::VectorXd&)> objective;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> descriptors;
  // Empty means every point is valid.
  std::function<bool(const Eigen::VectorXd&)> validity;
  std::vector<int> default_resolution;

  int input_dim() const { return input_box.dim(); }
  int descriptor_dim() const { return descriptor_box.dim(); }

  Evaluation evaluate(const Eigen::VectorXd& x) const;
  Evaluation evaluate_unit(const Eigen::VectorXd& u) const { return evaluate(input_box.from_unit(u)); }

  /// Descriptors of each row of `unit_points`, as rows.
  Eigen::MatrixXd descriptors_unit(const Eigen::MatrixXd& unit_points) const;

  RegionGrid grid(const std::vector<int>& partitions) const;
  RegionGrid default_grid() const { return grid(default_resolution); }
};

/// Call counters shared between a wrapped problem and its owner.
struct EvaluationCounter {
  std::shared_ptr<std::atomic<long>> objective_calls = std::make_shared<std::atomic<long>>(0);
  std::shared_ptr<std::atomic<long>> descriptor_calls = std::make_shared<std::atomic<long>>(0);
  // Calls to Problem::evaluate, valid or not.
  std::shared_ptr<std::atomic<long>> evaluation_calls = std::make_shared<std::atomic<long>>(0);

  long objective() const { return objective_calls->load(); }
  long descriptor() const { return descriptor_calls->load(); }
  long evaluations() const { return evaluation_calls->load(); }
};

/// Wraps every evaluator of `problem` so that calls are counted in `counter`.
Problem counting(const Problem& problem, const EvaluationCounter& counter);

}  // namespace bope
