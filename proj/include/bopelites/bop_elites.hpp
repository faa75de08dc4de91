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

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bopelites/acq_optimizer.hpp"
#include "bopelites/acquisition.hpp"
#include "bopelites/archive.hpp"
#include "bopelites/gp.hpp"
#include "bopelites/problem.hpp"

namespace bope {

struct RunConfig {
  std::string problem_id = "mishra";
  std::vector<int> resolution;  // empty: problem default
  long budget = 1000;
  long initial_design = 0;  // 0: 10 d
  DescriptorMode mode = DescriptorMode::BlackBox;
  std::uint64_t seed = 0;
  AcqOptimizerConfig optimizer;
  GpFitOptions gp;
  // Hyperparameters are re-fitted after every evaluation while the model has
  // at most this many points, then every `refit_period` evaluations.
  long full_refit_until = 300;
  long refit_period = 10;
  bool use_feasibility = true;
  FeasibilityOptions feasibility;
  bool initial_upscaling = false;
  int coarse_partitions = 5;

  long initial_design_size(int input_dim) const { return initial_design > 0 ? initial_design : 10L * input_dim; }
  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate(int input_dim) const;
};

struct TraceRecord {
  long iteration = 0;  // 0-based evaluation index
  Eigen::VectorXd x;   // natural coordinates
  double y = 0.0;
  Eigen::VectorXd b;
  bool valid = true;
  std::optional<std::size_t> region;
  double qd_score = 0.0;
  double omega = 0.0;
  long alpha = 0;
  long beta = 0;
  double acquisition = 0.0;  // NaN for the initial design
  double wall_seconds = 0.0;
};

struct Surrogates {
  std::optional<GpModel> objective;
  std::vector<GpModel> descriptors;
  FeasibilityModel feasibility;
};

/// Initial-design Sobol points shared by every model-based algorithm.
Eigen::MatrixXd initial_design(int input_dim, long count, std::uint64_t seed);

/// Objective and descriptor GPs on the valid observations, with full
/// hyperparameter fits while the data is small and periodic ones afterwards.
class SurrogateFitter {
 public:
  SurrogateFitter(GpFitOptions options, long full_refit_until, long refit_period, std::uint64_t seed,
                  int descriptor_models);

  /// `unit_inputs` rows align with `history`. Clears the models when fewer
  /// than two distinct valid points exist or a fit fails.
  void update(const Eigen::MatrixXd& unit_inputs, const std::vector<Observation>& history, long evaluation,
              Surrogates& out);

 private:
  GpFitOptions options_;
  long full_refit_until_;
  long refit_period_;
  std::uint64_t seed_;
  long last_full_fit_ = -1;
  std::optional<KernelParams> warm_objective_;
  std::vector<std::optional<KernelParams>> warm_descriptors_;
};

/// Sequential quality-diversity Bayesian optimiser.
class BopElites {
 public:
  BopElites(Problem problem, RunConfig config);

  /// Evaluates the Sobol initial design and fits the first models.
  void initialize();
  /// One propose, evaluate, offer, bookkeeping and refit cycle.
  void step();
  bool done() const { return evaluations_ >= config_.budget; }
  void run();

  const Problem& problem() const { return problem_; }
  const RunConfig& config() const { return config_; }
  const Archive& archive() const { return archive_; }
  const RegionGrid& target_grid() const { return target_grid_; }
  const Surrogates& models() const { return models_; }
  const AcquisitionState& state() const { return state_; }
  const std::vector<TraceRecord>& trace() const { return trace_; }
  const Eigen::MatrixXd& unit_inputs() const { return unit_inputs_; }
  long evaluations() const { return evaluations_; }

 private:
  void evaluate_and_record(const Eigen::VectorXd& u, double acquisition,
                           const std::optional<std::pair<std::size_t, double>>& dominant);
  void refresh_models();
  void maybe_switch_grid();
  AcquisitionContext context() const;

  Problem problem_;
  RunConfig config_;
  RegionGrid target_grid_;
  Archive archive_;
  Surrogates models_;
  AcquisitionState state_;
  std::vector<TraceRecord> trace_;
  Eigen::MatrixXd unit_inputs_;
  std::vector<bool> valid_;
  std::vector<Observation> observations_;
  long evaluations_ = 0;
  long coarse_until_ = 0;
  SurrogateFitter fitter_;
  std::chrono::steady_clock::time_point start_time_;
};

struct RunResult {
  RunConfig config;
  Archive archive;
  Surrogates models;
  AcquisitionState state;
  std::vector<TraceRecord> trace;
  long evaluations = 0;
  double wall_seconds = 0.0;
};

RunResult run_bop_elites(const Problem& problem, const RunConfig& config);

}  // namespace bope
