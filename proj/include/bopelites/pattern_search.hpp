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

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace bope {

/// Settings for the coordinate-poll direct search used for both acquisition
/// maximisation and GP hyperparameter fitting.
struct PatternSearchConfig {
  double initial_step = 0.1;
  double contraction_factor = 0.5;
  int max_generations = 100;
  int max_evals_per_generation = 1500;
  double min_step = 1e-5;

  void validate() const;
};

struct PatternSearchResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int generations = 0;
  long evaluations = 0;
  double final_step = 0.0;
};

/// Scores every row of `points`; the result has one entry per row.
using BatchObjective = std::function<Eigen::VectorXd(const Eigen::MatrixXd& points)>;
using PointObjective = std::function<double(const Eigen::VectorXd&)>;
/// As BatchObjective; `owners[i]` is the index of the search that polled row i.
using OwnedBatchObjective =
    std::function<Eigen::VectorXd(const Eigen::MatrixXd& points, const std::vector<Eigen::Index>& owners)>;

/// Maximises `f` from `start` inside the box [lower, upper].
PatternSearchResult pattern_search(const PointObjective& f, const Eigen::VectorXd& start,
                                   const PatternSearchConfig& config, const Eigen::VectorXd& lower,
                                   const Eigen::VectorXd& upper);

/// Unit-box overload.
PatternSearchResult pattern_search(const PointObjective& f, const Eigen::VectorXd& start,
                                   const PatternSearchConfig& config);

/// Runs one independent search per row of `starts` in lockstep. Each
/// generation's polls from all live searches are scored in a single call to
/// `f`; the trajectories are identical to running the searches one by one.
std::vector<PatternSearchResult> pattern_search_batch(const BatchObjective& f,
                                                      const Eigen::MatrixXd& starts,
                                                      const PatternSearchConfig& config,
                                                      const Eigen::VectorXd& lower,
                                                      const Eigen::VectorXd& upper);

std::vector<PatternSearchResult> pattern_search_batch(const BatchObjective& f,
                                                      const Eigen::MatrixXd& starts,
                                                      const PatternSearchConfig& config);

std::vector<PatternSearchResult> pattern_search_batch(const OwnedBatchObjective& f,
                                                      const Eigen::MatrixXd& starts,
                                                      const PatternSearchConfig& config,
                                                      const Eigen::VectorXd& lower,
                                                      const Eigen::VectorXd& upper);

std::vector<PatternSearchResult> pattern_search_batch(const OwnedBatchObjective& f,
                                                      const Eigen::MatrixXd& starts,
                                                      const PatternSearchConfig& config);

}  // namespace bope
