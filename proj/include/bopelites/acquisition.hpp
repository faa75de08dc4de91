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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bopelites/archive.hpp"
#include "bopelites/gp.hpp"

namespace bope {

double normal_pdf(double z);
double normal_cdf(double z);

/// mu + beta * s.
double ucb(const Posterior& objective, double beta_ucb);

/// Closed-form expected improvement over a region's elite; an empty region
/// has incumbent 0. With s = 0 this is max(mu - incumbent, 0).
double ei_region(const Posterior& objective, std::optional<double> elite_value);

/// Gaussian mass of the posterior on [lb, ub]. With s = 0 it is the indicator
/// of lb <= mu < ub.
double partition_probability(const Posterior& descriptor, double lb, double ub);

/// Product over descriptor dimensions of the partition probabilities of one
/// region. Degenerate posteriors follow the grid's own boundary rules.
double region_probability(std::span<const Posterior> descriptors, const RegionGrid& grid, std::size_t region);

/// Regions whose membership probability exceeds `threshold` (strictly), as
/// (flat index, probability) pairs in increasing index order. `threshold`
/// 0 returns every region with non-zero probability.
void region_probabilities_above(std::span<const Posterior> descriptors, const RegionGrid& grid, double threshold,
                                std::vector<std::pair<std::size_t, double>>& out);

/// Cutoff schedule: 0.5 (2/R)^g with g = sqrt(10 d / max(alpha - 2 beta + t, 1)).
double cutoff_omega(long alpha, long beta, long t, std::size_t region_count, int input_dim);

struct AcquisitionState {
  double omega = 0.0;
  long alpha_count = 0;  // mis-specification count
  long beta_count = 0;   // over-specificity count
  long t = 0;
  long init_budget = 0;

  /// State at the end of the initial design: t = 10 d so that omega = 1/|R|.
  static AcquisitionState initial(std::size_t region_count, int input_dim);
  double update_omega(std::size_t region_count, int input_dim);
};

double update_omega(AcquisitionState& state, std::size_t region_count, int input_dim);

struct RegionContribution {
  std::size_t region = 0;
  double probability = 0.0;  // retained (pre-normalisation) membership probability
  double ei = 0.0;
};

struct EjieEvaluation {
  double value = 0.0;
  double retained_mass = 0.0;
  std::vector<RegionContribution> retained;

  /// Region carrying the largest share of the normalised value, with that share.
  std::optional<std::pair<std::size_t, double>> dominant_region() const;
};

/// Sum over all regions of P(x -> r) EI_r(x), without cutoff or normalisation.
double ejie(const Posterior& objective, std::span<const Posterior> descriptors, const Archive& archive);

/// Cut-off, renormalised EJIE; 0 when no region clears the cutoff.
EjieEvaluation ejie_plus_detail(const Posterior& objective, std::span<const Posterior> descriptors,
                                const Archive& archive, double omega);
double ejie_plus(const Posterior& objective, std::span<const Posterior> descriptors, const Archive& archive,
                 double omega);

struct FeasibilityOptions {
  int features = 256;
  double lengthscale = 0.1;
  double l2 = 1e-3;
  int max_newton_steps = 60;
  std::uint64_t seed = 0;
};

/// Probability-of-validity classifier over unit-box inputs: L2-regularised
/// logistic regression on random Fourier features of an RBF kernel.
/// Inactive models report probability 1 everywhere.
class FeasibilityModel {
 public:
  bool active() const { return active_; }
  double probability(const Eigen::VectorXd& x) const;
  Eigen::VectorXd probability_batch(const Eigen::MatrixXd& points) const;

 private:
  friend FeasibilityModel fit_feasibility(const Eigen::MatrixXd&, const std::vector<bool>&,
                                          const FeasibilityOptions&);
  Eigen::MatrixXd features(const Eigen::MatrixXd& points) const;

  bool active_ = false;
  Eigen::MatrixXd frequencies_;  // features x d
  Eigen::VectorXd phases_;
  Eigen::VectorXd weights_;
  double bias_ = 0.0;
};

/// Fits on rows of `inputs` (unit box). Single-class data yields an inactive model.
FeasibilityModel fit_feasibility(const Eigen::MatrixXd& inputs, const std::vector<bool>& valid,
                                 const FeasibilityOptions& options = {});

/// EJIE+ times P_valid(x) when the feasibility model is active.
double ejie_plus_plus(double ejie_plus_value, const FeasibilityModel& feasibility, const Eigen::VectorXd& x);

/// Model-level entry points on a unit-box point.
double ejie_plus(const Eigen::VectorXd& x, const GpModel& objective, std::span<const GpModel> descriptors,
                 const Archive& archive, const AcquisitionState& state);
double ejie_plus_plus(const Eigen::VectorXd& x, const GpModel& objective, std::span<const GpModel> descriptors,
                      const Archive& archive, const AcquisitionState& state, const FeasibilityModel& feasibility);

}  // namespace bope
