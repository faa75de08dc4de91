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

#include "bopelites/acq_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "bopelites/sobol.hpp"

namespace bope {

namespace {

struct BatchPosteriors {
  Eigen::VectorXd mean, std;
  std::vector<Eigen::VectorXd> desc_mean, desc_std;
  Eigen::MatrixXd true_desc;
  Eigen::VectorXd feasibility;
};

BatchPosteriors posteriors(const AcquisitionContext& ctx, const Eigen::MatrixXd& points) {
  BatchPosteriors bp;
  if (ctx.objective) ctx.objective->predict_batch(points, bp.mean, bp.std);
  if (ctx.mode == DescriptorMode::BlackBox) {
    bp.desc_mean.resize(ctx.descriptors.size());
    bp.desc_std.resize(ctx.descriptors.size());
    for (std::size_t j = 0; j < ctx.descriptors.size(); ++j)
      ctx.descriptors[j].predict_batch(points, bp.desc_mean[j], bp.desc_std[j]);
  } else {
    if (!ctx.true_descriptors) throw std::logic_error("AcquisitionContext: white-box mode needs true_descriptors");
    bp.true_desc = ctx.true_descriptors(points);
  }
  if (ctx.feasibility && ctx.feasibility->active())
    bp.feasibility = ctx.feasibility->probability_batch(points);
  else
    bp.feasibility = Eigen::VectorXd::Ones(points.rows());
  return bp;
}

double nearest_distance(const Eigen::MatrixXd* evaluated, const Eigen::VectorXd& x) {
  if (!evaluated || evaluated->rows() == 0) return 1.0;
  return std::sqrt((evaluated->rowwise() - x.transpose()).rowwise().squaredNorm().minCoeff());
}

}  // namespace

AcquisitionContext::Scores AcquisitionContext::score(const Eigen::MatrixXd& points) const {
  if (!archive) throw std::logic_error("AcquisitionContext: archive not set");
  const auto& grid = archive->grid();
  const Eigen::Index q = points.rows();
  Scores s;
  s.predicted_region.assign(static_cast<std::size_t>(q), std::nullopt);
  s.restart_score = Eigen::VectorXd::Zero(q);
  s.value = Eigen::VectorXd::Zero(q);
  const BatchPosteriors bp = posteriors(*this, points);

  std::vector<Posterior> desc(static_cast<std::size_t>(grid.dims()));
  Eigen::VectorXd b(grid.dims());
  for (Eigen::Index i = 0; i < q; ++i) {
    const double pv = bp.feasibility[i];
    if (mode == DescriptorMode::BlackBox) {
      for (int j = 0; j < grid.dims(); ++j) {
        desc[static_cast<std::size_t>(j)] = Posterior{bp.desc_mean[static_cast<std::size_t>(j)][i],
                                                      bp.desc_std[static_cast<std::size_t>(j)][i]};
        b[j] = bp.desc_mean[static_cast<std::size_t>(j)][i];
      }
    } else {
      b = bp.true_desc.row(i).transpose();
    }
    const auto region = grid.flat_index(b);
    s.predicted_region[static_cast<std::size_t>(i)] = region;

    if (!objective) {
      const double v = pv * nearest_distance(evaluated_inputs, points.row(i).transpose());
      s.value[i] = v;
      s.restart_score[i] = v;
      continue;
    }
    const Posterior obj{bp.mean[i], bp.std[i]};
    if (region) s.restart_score[i] = pv * ei_region(obj, archive->elite_value(*region));
    if (mode == DescriptorMode::BlackBox) {
      s.value[i] = pv * ejie_plus(obj, desc, *archive, omega);
    } else {
      s.value[i] = region ? pv * ei_region(obj, archive->elite_value(*region)) : 0.0;
    }
  }
  return s;
}

Eigen::VectorXd AcquisitionContext::evaluate(const Eigen::MatrixXd& points) const { return score(points).value; }

EjieEvaluation AcquisitionContext::explain(const Eigen::VectorXd& x) const {
  EjieEvaluation out;
  if (!objective || !archive) return out;
  const Eigen::MatrixXd pt = x.transpose();
  const BatchPosteriors bp = posteriors(*this, pt);
  const Posterior obj{bp.mean[0], bp.std[0]};
  if (mode == DescriptorMode::BlackBox) {
    std::vector<Posterior> desc;
    for (std::size_t j = 0; j < bp.desc_mean.size(); ++j) desc.push_back(Posterior{bp.desc_mean[j][0], bp.desc_std[j][0]});
    return ejie_plus_detail(obj, desc, *archive, omega);
  }
  const auto region = archive->grid().flat_index(bp.true_desc.row(0).transpose());
  if (region) {
    const double ei = ei_region(obj, archive->elite_value(*region));
    out.retained.push_back(RegionContribution{*region, 1.0, ei});
    out.retained_mass = 1.0;
    out.value = ei;
  }
  return out;
}

RestartPlan select_restarts(const AcquisitionContext::Scores& scores, const Eigen::MatrixXd& presample, int count,
                            std::mt19937_64& rng) {
  if (count < 1) throw std::invalid_argument("select_restarts: count must be positive");
  const Eigen::Index q = presample.rows();
  if (q == 0) throw std::invalid_argument("select_restarts: empty presample");
  RestartPlan plan;
  plan.presample_count = static_cast<int>(q);

  // Best presample point per predicted region.
  std::map<std::size_t, Eigen::Index> best_in_region;
  std::map<std::size_t, std::vector<Eigen::Index>> members;
  for (Eigen::Index i = 0; i < q; ++i) {
    const auto& r = scores.predicted_region[static_cast<std::size_t>(i)];
    if (!r) continue;
    members[*r].push_back(i);
    auto it = best_in_region.find(*r);
    if (it == best_in_region.end() || scores.restart_score[i] > scores.restart_score[it->second])
      best_in_region[*r] = i;
  }
  std::vector<std::pair<std::size_t, Eigen::Index>> ranked(best_in_region.begin(), best_in_region.end());
  std::stable_sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    return scores.restart_score[a.second] > scores.restart_score[b.second];
  });

  std::vector<Eigen::Index> chosen;
  std::vector<bool> used_point(static_cast<std::size_t>(q), false);
  std::vector<std::size_t> used_regions;
  const std::size_t region_slots = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>((count + 1) / 2));
  if (ranked.empty()) {
    // No point maps into the grid: start from the best-scoring presample point.
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < q; ++i)
      if (scores.restart_score[i] > scores.restart_score[best]) best = i;
    chosen.push_back(best);
    used_point[static_cast<std::size_t>(best)] = true;
  }
  for (std::size_t k = 0; k < region_slots; ++k) {
    chosen.push_back(ranked[k].second);
    used_point[static_cast<std::size_t>(ranked[k].second)] = true;
    used_regions.push_back(ranked[k].first);
  }

  // Random fills, one per not-yet-represented region while any remain.
  std::vector<std::size_t> spare_regions;
  for (const auto& [r, idx] : members)
    if (std::find(used_regions.begin(), used_regions.end(), r) == used_regions.end()) spare_regions.push_back(r);
  std::shuffle(spare_regions.begin(), spare_regions.end(), rng);
  for (std::size_t k = 0; k < spare_regions.size() && static_cast<int>(chosen.size()) < count; ++k) {
    const auto& pts = members[spare_regions[k]];
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    const Eigen::Index i = pts[pick(rng)];
    chosen.push_back(i);
    used_point[static_cast<std::size_t>(i)] = true;
  }
  std::vector<Eigen::Index> rest;
  for (Eigen::Index i = 0; i < q; ++i)
    if (!used_point[static_cast<std::size_t>(i)]) rest.push_back(i);
  std::shuffle(rest.begin(), rest.end(), rng);
  for (std::size_t k = 0; k < rest.size() && static_cast<int>(chosen.size()) < count; ++k) chosen.push_back(rest[k]);

  plan.restart_count = static_cast<int>(chosen.size());
  plan.presample_indices = chosen;
  plan.restarts.resize(plan.restart_count, presample.cols());
  for (int k = 0; k < plan.restart_count; ++k) plan.restarts.row(k) = presample.row(chosen[static_cast<std::size_t>(k)]);
  return plan;
}

RestartPlan select_restarts(const AcquisitionContext& context, const Eigen::MatrixXd& presample, int count,
                            std::mt19937_64& rng) {
  return select_restarts(context.score(presample), presample, count, rng);
}

Proposal propose_next(const AcquisitionContext& context, const AcqOptimizerConfig& config, std::uint64_t seed) {
  if (!context.archive) throw std::logic_error("propose_next: archive not set");
  if (config.presample_count < 1 || config.restart_count < 1)
    throw std::invalid_argument("propose_next: presample and restart counts must be positive");
  const int d = [&] {
    if (context.objective) return static_cast<int>(context.objective->dim());
    if (context.evaluated_inputs && context.evaluated_inputs->cols() > 0)
      return static_cast<int>(context.evaluated_inputs->cols());
    throw std::logic_error("propose_next: cannot infer input dimension");
  }();

  ScrambledSobol sobol(d, seed);
  const Eigen::MatrixXd presample = sobol.draw(config.presample_count);
  const auto scores = context.score(presample);
  std::mt19937_64 rng(seed ^ 0xa5a5a5a5deadbeefull);

  Proposal out;
  out.plan = select_restarts(scores, presample, config.restart_count, rng);
  Eigen::Index fallback = 0;
  for (Eigen::Index i = 1; i < presample.rows(); ++i)
    if (scores.restart_score[i] > scores.restart_score[fallback]) fallback = i;
  out.fallback_x = presample.row(fallback).transpose();

  const BatchObjective f = [&context](const Eigen::MatrixXd& pts) { return context.evaluate(pts); };
  const auto results = pattern_search_batch(f, out.plan.restarts, config.search);
  for (const auto& r : results) out.plan.candidate_results.emplace_back(r.x, r.value);

  Eigen::Index best_presample = 0;
  for (Eigen::Index i = 1; i < presample.rows(); ++i)
    if (scores.value[i] > scores.value[best_presample]) best_presample = i;
  out.plan.candidate_results.emplace_back(presample.row(best_presample).transpose(), scores.value[best_presample]);

  std::size_t best = 0;
  for (std::size_t i = 1; i < out.plan.candidate_results.size(); ++i)
    if (out.plan.candidate_results[i].second > out.plan.candidate_results[best].second) best = i;
  out.x = out.plan.candidate_results[best].first;
  out.value = out.plan.candidate_results[best].second;
  out.improvement = out.value > 0.0;
  return out;
}

}  // namespace bope
