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
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bopelites/acq_optimizer.hpp"
#include "bopelites/archive.hpp"
#include "bopelites/baselines.hpp"
#include "bopelites/bop_elites.hpp"
#include "bopelites/gp.hpp"
#include "bopelites/pattern_search.hpp"
#include "bopelites/problem.hpp"

namespace bope {

struct PmProposal {
  Eigen::VectorXd x;  // unit box
  double predicted_value = 0.0;
  double region_probability = 1.0;
  // Predicted value times region probability (white-box: the predicted value).
  double score = 0.0;
  bool low_confidence = false;
  bool from_history = false;
};

struct PredictionMap {
  RegionGrid grid;
  DescriptorMode mode = DescriptorMode::WhiteBox;
  std::vector<std::optional<PmProposal>> proposals;

  std::size_t filled() const;
  double predicted_total() const;
  /// Proposal inputs in natural coordinates, for predicted_qd_score.
  std::vector<std::optional<Eigen::VectorXd>> natural_points(const Box& input_box) const;
};

struct PmConfig {
  int generations = 200;
  MapElitesConfig inner;
  int sobol_seeds = 1024;
  PatternSearchConfig polish{0.05, 0.5, 60, 1500, 1e-4};
  // Black-box cells whose region probability is below this are flagged.
  double low_confidence_threshold = 0.0;
  std::uint64_t seed = 0;
};

/// Per region, the posterior-mean maximiser among points whose true
/// descriptors land in it. `true_descriptors` maps unit rows to natural
/// descriptor rows. `seeds` (unit rows, usually the training inputs) start
/// the inner search alongside Sobol points.
PredictionMap build_pm_whitebox(const GpModel& objective, const RegionGrid& grid,
                                const BatchDescriptors& true_descriptors, const Eigen::MatrixXd& seeds,
                                const PmConfig& config = {});

/// Per region, the maximiser of mu(x) P(b(x) -> r) among points whose
/// posterior-mean descriptors land in r.
PredictionMap build_pm_blackbox(const GpModel& objective, std::span<const GpModel> descriptors,
                                const RegionGrid& grid, const Eigen::MatrixXd& seeds, const PmConfig& config = {});

/// Prediction map for `fine` from a finished run's models and history. Each
/// fine cell is also offered the best valid historical observation landing in
/// it; the historical point is kept unless the model-based proposal scores
/// strictly higher.
PredictionMap upscale(const Surrogates& models, DescriptorMode mode, const BatchDescriptors& true_descriptors,
                      const std::vector<Observation>& history, const Box& input_box, const RegionGrid& fine,
                      const PmConfig& config = {});

/// True QD score of the proposals (calls the true problem).
PredictedScore score_pm(const Problem& problem, const PredictionMap& pm);

}  // namespace bope
