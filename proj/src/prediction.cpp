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

#include "bopelites/prediction.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "bopelites/acquisition.hpp"
#include "bopelites/seed.hpp"
#include "bopelites/sobol.hpp"

namespace bope {

namespace {

enum Stream : std::uint64_t { kPmSobol = 21, kPmSearch = 22 };

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::MatrixXd stack_seeds(const Eigen::MatrixXd& seeds, int dim, const PmConfig& config) {
  ScrambledSobol sobol(dim, derive_seed(config.seed, kPmSobol));
  const Eigen::MatrixXd extra = sobol.draw(config.sobol_seeds);
  Eigen::MatrixXd all(seeds.rows() + extra.rows(), dim);
  if (seeds.rows() > 0) all.topRows(seeds.rows()) = seeds;
  all.bottomRows(extra.rows()) = extra;
  return all;
}

// Fitness and region assignment for one family of prediction maps.
struct PmModel {
  // Writes the assigned region (or nullopt) and the score of each row.
  std::function<void(const Eigen::MatrixXd&, std::vector<std::optional<std::size_t>>&, Eigen::VectorXd& score,
                     Eigen::VectorXd& mean, Eigen::VectorXd& probability)>
      assess;
};

PredictionMap build_pm(const PmModel& model, const RegionGrid& grid, DescriptorMode mode, const Eigen::MatrixXd& seeds,
                       int dim, const PmConfig& config) {
  std::mt19937_64 rng(derive_seed(config.seed, kPmSearch));
  const BatchFitness fitness = [&](const Eigen::MatrixXd& pts) {
    std::vector<std::optional<std::size_t>> r;
    Eigen::VectorXd s, m, p;
    model.assess(pts, r, s, m, p);
    return s;
  };
  const BatchDescriptors region_coords = [&](const Eigen::MatrixXd& pts) {
    // Centre of the assigned region, or NaN when outside the grid.
    std::vector<std::optional<std::size_t>> r;
    Eigen::VectorXd s, m, p;
    model.assess(pts, r, s, m, p);
    Eigen::MatrixXd out(pts.rows(), grid.dims());
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      if (!r[static_cast<std::size_t>(i)]) {
        out.row(i).setConstant(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const auto [lo, hi] = grid.region_box(*r[static_cast<std::size_t>(i)]);
      out.row(i) = (0.5 * (lo + hi)).transpose();
    }
    return out;
  };
  const SurrogateMap map =
      illuminate(fitness, region_coords, grid, stack_seeds(seeds, dim, config), config.generations, config.inner, rng);

  std::vector<std::size_t> cells;
  for (std::size_t r = 0; r < map.x.size(); ++r)
    if (map.x[r]) cells.push_back(r);
  Eigen::MatrixXd starts(static_cast<Eigen::Index>(cells.size()), dim);
  for (std::size_t k = 0; k < cells.size(); ++k) starts.row(static_cast<Eigen::Index>(k)) = map.x[cells[k]]->transpose();

  const OwnedBatchObjective constrained = [&](const Eigen::MatrixXd& pts, const std::vector<Eigen::Index>& owners) {
    std::vector<std::optional<std::size_t>> r;
    Eigen::VectorXd s, m, p;
    model.assess(pts, r, s, m, p);
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
      if (r[static_cast<std::size_t>(i)] != cells[static_cast<std::size_t>(owners[static_cast<std::size_t>(i)])])
        s[i] = kNegInf;
    return s;
  };
  std::vector<PatternSearchResult> polished;
  if (!cells.empty()) polished = pattern_search_batch(constrained, starts, config.polish);

  PredictionMap pm;
  pm.grid = grid;
  pm.mode = mode;
  pm.proposals.assign(grid.region_count(), std::nullopt);
  if (cells.empty()) return pm;
  Eigen::MatrixXd finals(static_cast<Eigen::Index>(cells.size()), dim);
  for (std::size_t k = 0; k < cells.size(); ++k) finals.row(static_cast<Eigen::Index>(k)) = polished[k].x.transpose();
  std::vector<std::optional<std::size_t>> r;
  Eigen::VectorXd s, m, p;
  model.assess(finals, r, s, m, p);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    if (r[k] != cells[k] || !std::isfinite(s[i])) continue;
    PmProposal prop;
    prop.x = finals.row(i).transpose();
    prop.predicted_value = m[i];
    prop.region_probability = p[i];
    prop.score = s[i];
    prop.low_confidence = mode == DescriptorMode::BlackBox && p[i] < config.low_confidence_threshold;
    pm.proposals[cells[k]] = prop;
  }
  return pm;
}

PmModel whitebox_model(const GpModel& objective, const RegionGrid& grid, const BatchDescriptors& true_descriptors) {
  PmModel model;
  model.assess = [&objective, &grid, true_descriptors](const Eigen::MatrixXd& pts,
                                                        std::vector<std::optional<std::size_t>>& regions,
                                                        Eigen::VectorXd& score, Eigen::VectorXd& mean,
                                                        Eigen::VectorXd& probability) {
    mean = objective.predict_mean_batch(pts);
    const Eigen::MatrixXd b = true_descriptors(pts);
    regions.resize(static_cast<std::size_t>(pts.rows()));
    score = mean;
    probability = Eigen::VectorXd::Ones(pts.rows());
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      regions[static_cast<std::size_t>(i)] = grid.flat_index(b.row(i).transpose());
      if (!regions[static_cast<std::size_t>(i)]) score[i] = kNegInf;
    }
  };
  return model;
}

PmModel blackbox_model(const GpModel& objective, std::span<const GpModel> descriptors, const RegionGrid& grid) {
  PmModel model;
  model.assess = [&objective, descriptors, &grid](const Eigen::MatrixXd& pts,
                                                   std::vector<std::optional<std::size_t>>& regions,
                                                   Eigen::VectorXd& score, Eigen::VectorXd& mean,
                                                   Eigen::VectorXd& probability) {
    mean = objective.predict_mean_batch(pts);
    const auto m = static_cast<Eigen::Index>(descriptors.size());
    Eigen::MatrixXd dm(pts.rows(), m), ds(pts.rows(), m);
    for (Eigen::Index j = 0; j < m; ++j) {
      Eigen::VectorXd mu, sd;
      descriptors[static_cast<std::size_t>(j)].predict_batch(pts, mu, sd);
      dm.col(j) = mu;
      ds.col(j) = sd;
    }
    regions.resize(static_cast<std::size_t>(pts.rows()));
    score.resize(pts.rows());
    probability.resize(pts.rows());
    std::vector<Posterior> post(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      const auto r = grid.flat_index(dm.row(i).transpose());
      regions[static_cast<std::size_t>(i)] = r;
      if (!r) {
        score[i] = kNegInf;
        probability[i] = 0.0;
        continue;
      }
      for (Eigen::Index j = 0; j < m; ++j) post[static_cast<std::size_t>(j)] = Posterior{dm(i, j), ds(i, j)};
      probability[i] = region_probability(post, grid, *r);
      score[i] = mean[i] * probability[i];
    }
  };
  return model;
}

}  // namespace

std::size_t PredictionMap::filled() const {
  std::size_t n = 0;
  for (const auto& p : proposals) n += p.has_value();
  return n;
}

double PredictionMap::predicted_total() const {
  double t = 0.0;
  for (const auto& p : proposals)
    if (p) t += p->predicted_value;
  return t;
}

std::vector<std::optional<Eigen::VectorXd>> PredictionMap::natural_points(const Box& input_box) const {
  std::vector<std::optional<Eigen::VectorXd>> out(proposals.size());
  for (std::size_t r = 0; r < proposals.size(); ++r)
    if (proposals[r]) out[r] = input_box.from_unit(proposals[r]->x);
  return out;
}

PredictionMap build_pm_whitebox(const GpModel& objective, const RegionGrid& grid,
                                const BatchDescriptors& true_descriptors, const Eigen::MatrixXd& seeds,
                                const PmConfig& config) {
  if (!true_descriptors) throw std::invalid_argument("build_pm_whitebox: descriptor function required");
  const int dim = static_cast<int>(objective.dim());
  return build_pm(whitebox_model(objective, grid, true_descriptors), grid, DescriptorMode::WhiteBox, seeds, dim,
                  config);
}

PredictionMap build_pm_blackbox(const GpModel& objective, std::span<const GpModel> descriptors,
                                const RegionGrid& grid, const Eigen::MatrixXd& seeds, const PmConfig& config) {
  if (static_cast<int>(descriptors.size()) != grid.dims())
    throw std::invalid_argument("build_pm_blackbox: one descriptor model per grid dimension required");
  const int dim = static_cast<int>(objective.dim());
  return build_pm(blackbox_model(objective, descriptors, grid), grid, DescriptorMode::BlackBox, seeds, dim, config);
}

PredictionMap upscale(const Surrogates& models, DescriptorMode mode, const BatchDescriptors& true_descriptors,
                      const std::vector<Observation>& history, const Box& input_box, const RegionGrid& fine,
                      const PmConfig& config) {
  if (!models.objective) throw std::invalid_argument("upscale: the run has no objective model");
  const int dim = static_cast<int>(models.objective->dim());
  std::vector<Eigen::Index> valid;
  for (std::size_t i = 0; i < history.size(); ++i)
    if (history[i].valid) valid.push_back(static_cast<Eigen::Index>(i));
  Eigen::MatrixXd seeds(static_cast<Eigen::Index>(valid.size()), dim);
  for (std::size_t k = 0; k < valid.size(); ++k)
    seeds.row(static_cast<Eigen::Index>(k)) =
        input_box.to_unit(history[static_cast<std::size_t>(valid[k])].x).transpose();

  PmModel model = mode == DescriptorMode::WhiteBox
                      ? whitebox_model(*models.objective, fine, true_descriptors)
                      : blackbox_model(*models.objective, models.descriptors, fine);
  if (mode == DescriptorMode::BlackBox && static_cast<int>(models.descriptors.size()) != fine.dims())
    throw std::invalid_argument("upscale: black-box run without descriptor models");
  if (mode == DescriptorMode::WhiteBox && !true_descriptors)
    throw std::invalid_argument("upscale: white-box run needs the descriptor function");
  PredictionMap pm = build_pm(model, fine, mode, seeds, dim, config);

  // Best observed point per fine cell by true descriptors.
  std::vector<std::optional<std::size_t>> best(fine.region_count());
  for (std::size_t k = 0; k < valid.size(); ++k) {
    const Observation& o = history[static_cast<std::size_t>(valid[k])];
    const auto r = fine.flat_index(o.b);
    if (!r) continue;
    if (!best[*r] || o.y > history[static_cast<std::size_t>(valid[*best[*r]])].y) best[*r] = k;
  }
  std::vector<std::size_t> cells;
  Eigen::MatrixXd pts(0, dim);
  for (std::size_t r = 0; r < best.size(); ++r) {
    if (!best[r]) continue;
    cells.push_back(r);
    pts.conservativeResize(pts.rows() + 1, Eigen::NoChange);
    pts.row(pts.rows() - 1) = seeds.row(static_cast<Eigen::Index>(*best[r]));
  }
  if (cells.empty()) return pm;
  std::vector<std::optional<std::size_t>> regions;
  Eigen::VectorXd score, mean, probability;
  model.assess(pts, regions, score, mean, probability);
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const std::size_t r = cells[k];
    const Observation& o = history[static_cast<std::size_t>(valid[*best[r]])];
    // Observed points are certain: true value, true region.
    const double hist_score = o.y;
    if (pm.proposals[r] && pm.proposals[r]->score > hist_score) continue;
    PmProposal prop;
    prop.x = pts.row(i).transpose();
    prop.predicted_value = mean[i];
    prop.region_probability = regions[k] == r ? probability[i] : 0.0;
    prop.score = hist_score;
    prop.from_history = true;
    pm.proposals[r] = prop;
  }
  return pm;
}

PredictedScore score_pm(const Problem& problem, const PredictionMap& pm) {
  return predicted_qd_score(problem, pm.grid, pm.natural_points(problem.input_box));
}

}  // namespace bope
