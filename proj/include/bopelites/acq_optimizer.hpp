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
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bopelites/acquisition.hpp"
#include "bopelites/archive.hpp"
#include "bopelites/gp.hpp"
#include "bopelites/pattern_search.hpp"

namespace bope {

enum class DescriptorMode { WhiteBox, BlackBox };

struct AcqOptimizerConfig {
  int presample_count = 1024;
  int restart_count = 10;
  PatternSearchConfig search{0.1, 0.5, 100, 1500, 1e-5};
};

/// Non-owning view of everything one acquisition evaluation depends on.
///
/// Black-box mode weights regions by descriptor-GP membership probabilities
/// with the omega cutoff. White-box mode calls `true_descriptors` and uses the
/// exact region. Without an objective model (no valid data yet) the value is
/// the distance to the nearest evaluated input, still weighted by feasibility.
struct AcquisitionContext {
  DescriptorMode mode = DescriptorMode::BlackBox;
  const GpModel* objective = nullptr;
  std::span<const GpModel> descriptors;
  // Maps unit-box rows to natural descriptor rows.
  std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> true_descriptors;
  const Archive* archive = nullptr;
  const FeasibilityModel* feasibility = nullptr;
  double omega = 0.0;
  const Eigen::MatrixXd* evaluated_inputs = nullptr;

  /// EJIE++ for each row of `points` (unit box).
  Eigen::VectorXd evaluate(const Eigen::MatrixXd& points) const;

  /// Region breakdown at one point before feasibility weighting.
  EjieEvaluation explain(const Eigen::VectorXd& x) const;

  struct Scores {
    std::vector<std::optional<std::size_t>> predicted_region;
    // EI against the predicted region's elite only (feasibility weighted).
    Eigen::VectorXd restart_score;
    Eigen::VectorXd value;
  };
  Scores score(const Eigen::MatrixXd& points) const;
};

struct RestartPlan {
  int presample_count = 0;
  int restart_count = 0;
  Eigen::MatrixXd restarts;
  std::vector<Eigen::Index> presample_indices;
  std::vector<std::pair<Eigen::VectorXd, double>> candidate_results;
};

/// Picks `count` starting points from a scored presample: the best point of
/// each of the top ceil(count/2) predicted regions, then random presample
/// points from regions not yet represented, then any remaining points.
RestartPlan select_restarts(const AcquisitionContext::Scores& scores, const Eigen::MatrixXd& presample, int count,
                            std::mt19937_64& rng);

RestartPlan select_restarts(const AcquisitionContext& context, const Eigen::MatrixXd& presample, int count,
                            std::mt19937_64& rng);

struct Proposal {
  Eigen::VectorXd x;
  double value = 0.0;
  // False when every candidate scored exactly zero.
  bool improvement = false;
  // Best presample point by restart score; evaluated when improvement is
  // repeatedly absent.
  Eigen::VectorXd fallback_x;
  RestartPlan plan;
};

/// Sobol presample, restart selection, lockstep pattern search, argmax.
Proposal propose_next(const AcquisitionContext& context, const AcqOptimizerConfig& config, std::uint64_t seed);

}  // namespace bope
