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

#include "bopelites/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "bopelites/acquisition.hpp"
#include "bopelites/seed.hpp"
#include "bopelites/sobol.hpp"

namespace bope {

namespace {

enum Stream : std::uint64_t { kMapElites = 11, kSobolRun = 12, kSail = 13 };

class Recorder {
 public:
  Recorder(const Problem& problem, const RegionGrid& grid) : problem_(problem), archive_(grid) {
    unit_inputs_.resize(0, problem.input_dim());
  }

  void evaluate(const Eigen::VectorXd& u, double acquisition = std::numeric_limits<double>::quiet_NaN()) {
    const Eigen::VectorXd x = problem_.input_box.from_unit(u);
    const Evaluation e = problem_.evaluate(x);
    const long it = static_cast<long>(trace_.size());
    archive_.offer(Observation{x, e.y, e.b, e.valid, it});
    unit_inputs_.conservativeResize(unit_inputs_.rows() + 1, Eigen::NoChange);
    unit_inputs_.row(unit_inputs_.rows() - 1) = problem_.input_box.to_unit(x).transpose();
    TraceRecord rec;
    rec.iteration = it;
    rec.x = x;
    rec.y = e.y;
    rec.b = e.b;
    rec.valid = e.valid;
    if (e.valid) rec.region = archive_.grid().flat_index(e.b);
    rec.qd_score = archive_.qd_score();
    rec.acquisition = acquisition;
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    trace_.push_back(std::move(rec));
  }

  long count() const { return static_cast<long>(trace_.size()); }
  const Archive& archive() const { return archive_; }
  const Eigen::MatrixXd& unit_inputs() const { return unit_inputs_; }

  BaselineResult finish(Surrogates models = {}) {
    BaselineResult r;
    r.archive = archive_;
    r.trace = trace_;
    r.evaluations = count();
    r.wall_seconds = trace_.empty() ? 0.0 : trace_.back().wall_seconds;
    r.models = std::move(models);
    return r;
  }

 private:
  const Problem& problem_;
  Archive archive_;
  Eigen::MatrixXd unit_inputs_;
  std::vector<TraceRecord> trace_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Eigen::VectorXd mutate(const Eigen::VectorXd& parent, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, sigma);
  Eigen::VectorXd child = parent;
  for (Eigen::Index k = 0; k < child.size(); ++k) child[k] = std::clamp(child[k] + noise(rng), 0.0, 1.0);
  return child;
}

Eigen::VectorXd uniform_point(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd u(d);
  for (int k = 0; k < d; ++k) u[k] = unif(rng);
  return u;
}

}  // namespace

void MapElitesConfig::validate() const {
  if (!(mutation_sigma > 0.0)) throw std::invalid_argument("MapElitesConfig: mutation_sigma must be positive");
  if (children_per_generation < 1 || initial_batch < 1)
    throw std::invalid_argument("MapElitesConfig: batch sizes must be positive");
}

void SailConfig::validate() const {
  if (!(beta_ucb >= 0.0)) throw std::invalid_argument("SailConfig: beta_ucb must be non-negative");
  if (inner_generations < 0) throw std::invalid_argument("SailConfig: inner_generations must be non-negative");
  if (refit_period < 1) throw std::invalid_argument("SailConfig: refit_period must be positive");
  inner.validate();
}

BaselineResult map_elites_run(const Problem& problem, const RegionGrid& grid, long budget,
                              const MapElitesConfig& config, std::uint64_t seed) {
  config.validate();
  if (budget < 1) throw std::invalid_argument("map_elites_run: budget must be positive");
  std::mt19937_64 rng(derive_seed(seed, kMapElites));
  Recorder rec(problem, grid);
  const int d = problem.input_dim();

  const long first = std::min<long>(config.initial_batch, budget);
  for (long i = 0; i < first; ++i) rec.evaluate(uniform_point(d, rng));

  while (rec.count() < budget) {
    std::vector<std::size_t> filled;
    for (std::size_t r = 0; r < grid.region_count(); ++r)
      if (rec.archive().elite(r)) filled.push_back(r);
    const long batch = std::min<long>(config.children_per_generation, budget - rec.count());
    std::vector<Eigen::VectorXd> children;
    for (long c = 0; c < batch; ++c) {
      if (filled.empty()) {
        children.push_back(uniform_point(d, rng));
        continue;
      }
      std::uniform_int_distribution<std::size_t> pick(0, filled.size() - 1);
      const Observation* parent = rec.archive().elite(filled[pick(rng)]);
      children.push_back(mutate(problem.input_box.to_unit(parent->x), config.mutation_sigma, rng));
    }
    // Parents come from the archive as it was at the start of the generation.
    for (const auto& c : children) rec.evaluate(c);
  }
  return rec.finish();
}

BaselineResult sobol_run(const Problem& problem, const RegionGrid& grid, long budget, std::uint64_t seed) {
  if (budget < 0) throw std::invalid_argument("sobol_run: budget must be non-negative");
  ScrambledSobol sobol(problem.input_dim(), derive_seed(seed, kSobolRun));
  Recorder rec(problem, grid);
  for (long i = 0; i < budget; ++i) rec.evaluate(sobol.next());
  return rec.finish();
}

std::size_t SurrogateMap::filled() const {
  return static_cast<std::size_t>(std::count_if(x.begin(), x.end(), [](const auto& v) { return v.has_value(); }));
}

SurrogateMap illuminate(const BatchFitness& fitness, const BatchDescriptors& descriptors, const RegionGrid& grid,
                        const Eigen::MatrixXd& seeds, int generations, const MapElitesConfig& config,
                        std::mt19937_64& rng) {
  config.validate();
  SurrogateMap map;
  map.x.assign(grid.region_count(), std::nullopt);
  map.fitness.assign(grid.region_count(), -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> filled;

  auto offer = [&](const Eigen::MatrixXd& pts) {
    if (pts.rows() == 0) return;
    const Eigen::VectorXd f = fitness(pts);
    const Eigen::MatrixXd b = descriptors(pts);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      if (!std::isfinite(f[i])) continue;
      const auto r = grid.flat_index(b.row(i).transpose());
      if (!r) continue;
      if (!map.x[*r]) {
        filled.push_back(*r);
      } else if (!(f[i] > map.fitness[*r])) {
        continue;
      }
      map.x[*r] = pts.row(i).transpose();
      map.fitness[*r] = f[i];
    }
  };

  offer(seeds);
  const int d = static_cast<int>(seeds.cols());
  for (int g = 0; g < generations; ++g) {
    Eigen::MatrixXd children(config.children_per_generation, d);
    for (int c = 0; c < config.children_per_generation; ++c) {
      if (filled.empty()) {
        children.row(c) = uniform_point(d, rng).transpose();
        continue;
      }
      std::uniform_int_distribution<std::size_t> pick(0, filled.size() - 1);
      children.row(c) = mutate(*map.x[filled[pick(rng)]], config.mutation_sigma, rng).transpose();
    }
    offer(children);
  }
  return map;
}

namespace {

BaselineResult sail_like(const Problem& problem, const RegionGrid& grid, long budget, const SailConfig& config,
                         std::uint64_t seed, bool black_box) {
  config.validate();
  const int d = problem.input_dim();
  const long n0 = config.initial_design > 0 ? config.initial_design : 10L * d;
  if (n0 < 2 || budget < n0) throw std::invalid_argument("sail_run: budget smaller than the initial design");

  Recorder rec(problem, grid);
  const Eigen::MatrixXd design = initial_design(d, n0, seed);
  for (Eigen::Index i = 0; i < design.rows(); ++i) rec.evaluate(design.row(i).transpose());

  SurrogateFitter fitter(config.gp, config.full_refit_until, config.refit_period, seed,
                         black_box ? problem.descriptor_dim() : 0);
  Surrogates models;
  std::mt19937_64 rng(derive_seed(seed, kSail));

  while (rec.count() < budget) {
    fitter.update(rec.unit_inputs(), rec.archive().history(), rec.count(), models);

    std::vector<Eigen::Index> valid_rows;
    for (Eigen::Index i = 0; i < rec.unit_inputs().rows(); ++i)
      if (rec.archive().history()[static_cast<std::size_t>(i)].valid) valid_rows.push_back(i);
    Eigen::MatrixXd seeds(static_cast<Eigen::Index>(valid_rows.size()), d);
    for (std::size_t i = 0; i < valid_rows.size(); ++i)
      seeds.row(static_cast<Eigen::Index>(i)) = rec.unit_inputs().row(valid_rows[i]);

    if (!models.objective || (black_box && models.descriptors.empty())) {
      rec.evaluate(uniform_point(d, rng));
      continue;
    }
    const GpModel& obj = *models.objective;
    const BatchFitness ucb_fitness = [&](const Eigen::MatrixXd& pts) {
      Eigen::VectorXd mean, sd;
      obj.predict_batch(pts, mean, sd);
      return Eigen::VectorXd(mean + config.beta_ucb * sd);
    };
    BatchDescriptors desc;
    if (black_box) {
      desc = [&](const Eigen::MatrixXd& pts) {
        Eigen::MatrixXd out(pts.rows(), static_cast<Eigen::Index>(models.descriptors.size()));
        for (std::size_t j = 0; j < models.descriptors.size(); ++j)
          out.col(static_cast<Eigen::Index>(j)) = models.descriptors[j].predict_mean_batch(pts);
        return out;
      };
    } else {
      desc = [&](const Eigen::MatrixXd& pts) { return problem.descriptors_unit(pts); };
    }
    const SurrogateMap map = illuminate(ucb_fitness, desc, grid, seeds, config.inner_generations, config.inner, rng);

    // Uniform over filled cells, preferring cells whose point was not evaluated yet.
    std::set<std::vector<double>> seen;
    for (Eigen::Index i = 0; i < rec.unit_inputs().rows(); ++i) {
      const Eigen::VectorXd row = rec.unit_inputs().row(i).transpose();
      seen.insert(std::vector<double>(row.data(), row.data() + row.size()));
    }
    std::vector<std::size_t> fresh, any;
    for (std::size_t r = 0; r < map.x.size(); ++r) {
      if (!map.x[r]) continue;
      any.push_back(r);
      const auto& v = *map.x[r];
      if (!seen.count(std::vector<double>(v.data(), v.data() + v.size()))) fresh.push_back(r);
    }
    const auto& pool = fresh.empty() ? any : fresh;
    if (pool.empty()) {
      rec.evaluate(uniform_point(d, rng));
      continue;
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::size_t cell = pool[pick(rng)];
    rec.evaluate(*map.x[cell], map.fitness[cell]);
  }
  fitter.update(rec.unit_inputs(), rec.archive().history(), rec.count(), models);
  return rec.finish(std::move(models));
}

}  // namespace

BaselineResult sail_run(const Problem& problem, const RegionGrid& grid, long budget, const SailConfig& config,
                        std::uint64_t seed) {
  return sail_like(problem, grid, budget, config, seed, false);
}

BaselineResult sphen_run(const Problem& problem, const RegionGrid& grid, long budget, const SailConfig& config,
                         std::uint64_t seed) {
  return sail_like(problem, grid, budget, config, seed, true);
}

}  // namespace bope
