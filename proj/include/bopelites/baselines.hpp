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
#include <vector>

#include <Eigen/Dense>

#include "bopelites/archive.hpp"
#include "bopelites/bop_elites.hpp"
#include "bopelites/gp.hpp"
#include "bopelites/problem.hpp"

namespace bope {

struct MapElitesConfig {
  double mutation_sigma = 0.1;  // in unit-box coordinates
  int children_per_generation = 50;
  int initial_batch = 50;
  void validate() const;
};

struct BaselineResult {
  Archive archive;
  std::vector<TraceRecord> trace;
  long evaluations = 0;
  double wall_seconds = 0.0;
  Surrogates models;
};

/// The initial batch counts as the first generation, so exactly `budget`
/// points are evaluated (budget 1000 with 50 children is 20 generations).
BaselineResult map_elites_run(const Problem& problem, const RegionGrid& grid, long budget,
                              const MapElitesConfig& config, std::uint64_t seed);

BaselineResult sobol_run(const Problem& problem, const RegionGrid& grid, long budget, std::uint64_t seed);

/// Per-region best of a surrogate-only MAP-Elites search.
struct SurrogateMap {
  std::vector<std::optional<Eigen::VectorXd>> x;  // unit box
  std::vector<double> fitness;
  std::size_t filled() const;
};

using BatchFitness = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;
using BatchDescriptors = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

/// MAP-Elites over cheap batch functions. `seeds` rows are offered first; then
/// `generations` batches of mutated children of uniformly chosen elites.
/// Non-finite fitness values are discarded.
SurrogateMap illuminate(const BatchFitness& fitness, const BatchDescriptors& descriptors, const RegionGrid& grid,
                        const Eigen::MatrixXd& seeds, int generations, const MapElitesConfig& config,
                        std::mt19937_64& rng);

struct SailConfig {
  double beta_ucb = 3.7;
  int inner_generations = 10;
  MapElitesConfig inner;
  long initial_design = 0;  // 0: 10 d
  GpFitOptions gp;
  long full_refit_until = 300;
  long refit_period = 10;
  void validate() const;
};

/// SAIL with the true descriptors (white-box).
BaselineResult sail_run(const Problem& problem, const RegionGrid& grid, long budget, const SailConfig& config,
                        std::uint64_t seed);

/// SAIL with descriptor GPs; the acquisition map bins by posterior-mean
/// descriptors.
BaselineResult sphen_run(const Problem& problem, const RegionGrid& grid, long budget, const SailConfig& config,
                         std::uint64_t seed);

}  // namespace bope
