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

#include "bopelites/bop_elites.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bopelites/seed.hpp"
#include "bopelites/sobol.hpp"

namespace bope {

namespace {

enum Stream : std::uint64_t { kInitial = 1, kProposal = 2, kObjectiveFit = 3, kDescriptorFit = 4, kFeasibility = 5 };

bool has_two_distinct(const Eigen::MatrixXd& x) {
  for (Eigen::Index i = 1; i < x.rows(); ++i)
    if (x.row(i) != x.row(0)) return true;
  return false;
}

}  // namespace

Eigen::MatrixXd initial_design(int input_dim, long count, std::uint64_t seed) {
  ScrambledSobol sobol(input_dim, derive_seed(seed, kInitial));
  return sobol.draw(count);
}

SurrogateFitter::SurrogateFitter(GpFitOptions options, long full_refit_until, long refit_period, std::uint64_t seed,
                                 int descriptor_models)
    : options_(std::move(options)),
      full_refit_until_(full_refit_until),
      refit_period_(refit_period),
      seed_(seed),
      warm_descriptors_(static_cast<std::size_t>(descriptor_models)) {}

void SurrogateFitter::update(const Eigen::MatrixXd& unit_inputs, const std::vector<Observation>& history,
                             long evaluation, Surrogates& out) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < history.size(); ++i)
    if (history[i].valid) rows.push_back(i);
  const auto nv = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd xv(nv, unit_inputs.cols());
  Eigen::VectorXd yv(nv);
  for (Eigen::Index i = 0; i < nv; ++i) {
    xv.row(i) = unit_inputs.row(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]));
    yv[i] = history[rows[static_cast<std::size_t>(i)]].y;
  }
  if (nv < 2 || !has_two_distinct(xv)) {
    out.objective.reset();
    out.descriptors.clear();
    return;
  }

  const bool full = !warm_objective_ || nv <= full_refit_until_ || last_full_fit_ < 0 ||
                    evaluation - last_full_fit_ >= refit_period_;
  if (full) last_full_fit_ = evaluation;

  auto fit_one = [&](const Eigen::VectorXd& targets, std::optional<KernelParams>& warm, std::uint64_t stream,
                     std::uint64_t index) {
    if (!full && warm) {
      try {
        return GpModel::condition(xv, targets, *warm, options_.initial_jitter, options_.max_jitter);
      } catch (const GpFitError&) {
      }
    }
    GpFitOptions go = options_;
    go.seed = derive_seed(seed_, stream, static_cast<std::uint64_t>(evaluation) * 16 + index);
    go.warm_start = warm;
    GpModel m = GpModel::fit(xv, targets, go);
    warm = m.params();
    return m;
  };

  try {
    out.objective = fit_one(yv, warm_objective_, kObjectiveFit, 0);
    std::vector<GpModel> desc;
    for (std::size_t j = 0; j < warm_descriptors_.size(); ++j) {
      Eigen::VectorXd bj(nv);
      for (Eigen::Index i = 0; i < nv; ++i) bj[i] = history[rows[static_cast<std::size_t>(i)]].b[static_cast<Eigen::Index>(j)];
      desc.push_back(fit_one(bj, warm_descriptors_[j], kDescriptorFit, j + 1));
    }
    out.descriptors = std::move(desc);
  } catch (const GpFitError&) {
    out.objective.reset();
    out.descriptors.clear();
  }
}

void RunConfig::validate(int input_dim) const {
  const long n0 = initial_design_size(input_dim);
  if (n0 < 2) throw std::invalid_argument("RunConfig: initial design must have at least 2 points");
  if (budget < n0) throw std::invalid_argument("RunConfig: budget smaller than the initial design");
  if (refit_period < 1) throw std::invalid_argument("RunConfig: refit_period must be positive");
  if (coarse_partitions < 1) throw std::invalid_argument("RunConfig: coarse_partitions must be positive");
  for (int n : resolution)
    if (n < 1) throw std::invalid_argument("RunConfig: resolution entries must be positive");
  optimizer.search.validate();
}

BopElites::BopElites(Problem problem, RunConfig config)
    : problem_(std::move(problem)),
      config_(std::move(config)),
      fitter_(config_.gp, config_.full_refit_until, config_.refit_period, config_.seed,
              config_.mode == DescriptorMode::BlackBox ? problem_.descriptor_dim() : 0) {
  config_.validate(problem_.input_dim());
  const auto& res = config_.resolution.empty() ? problem_.default_resolution : config_.resolution;
  if (static_cast<int>(res.size()) != problem_.descriptor_dim())
    throw std::invalid_argument("BopElites: resolution does not match the descriptor count");
  config_.resolution = res;
  target_grid_ = problem_.grid(res);
  RegionGrid active = target_grid_;
  if (config_.initial_upscaling) {
    active = target_grid_.with_partitions(std::vector<int>(res.size(), config_.coarse_partitions));
    coarse_until_ = std::min<long>(2L * static_cast<long>(active.region_count()), config_.budget / 4);
  }
  archive_ = Archive(active);
  unit_inputs_.resize(0, problem_.input_dim());
}

void BopElites::initialize() {
  if (evaluations_ > 0) throw std::logic_error("BopElites::initialize called twice");
  start_time_ = std::chrono::steady_clock::now();
  const int d = problem_.input_dim();
  state_ = AcquisitionState::initial(archive_.grid().region_count(), d);
  const Eigen::MatrixXd design = initial_design(d, config_.initial_design_size(d), config_.seed);
  for (Eigen::Index i = 0; i < design.rows(); ++i)
    evaluate_and_record(design.row(i).transpose(), std::numeric_limits<double>::quiet_NaN(), std::nullopt);
  maybe_switch_grid();
  refresh_models();
}

AcquisitionContext BopElites::context() const {
  AcquisitionContext ctx;
  ctx.mode = config_.mode;
  ctx.objective = models_.objective ? &*models_.objective : nullptr;
  ctx.descriptors = models_.descriptors;
  if (config_.mode == DescriptorMode::WhiteBox) {
    const Problem* p = &problem_;
    ctx.true_descriptors = [p](const Eigen::MatrixXd& pts) { return p->descriptors_unit(pts); };
  }
  ctx.archive = &archive_;
  ctx.feasibility = config_.use_feasibility ? &models_.feasibility : nullptr;
  ctx.omega = state_.omega;
  ctx.evaluated_inputs = &unit_inputs_;
  return ctx;
}

void BopElites::step() {
  if (evaluations_ == 0) throw std::logic_error("BopElites::step before initialize");
  if (done()) throw std::logic_error("BopElites::step: budget exhausted");
  const int d = problem_.input_dim();
  const std::size_t regions = archive_.grid().region_count();

  // Black-box descriptor models are needed before the region weighting can work.
  const bool ready = config_.mode == DescriptorMode::WhiteBox || !models_.objective ||
                     models_.descriptors.size() == static_cast<std::size_t>(problem_.descriptor_dim());
  AcquisitionContext ctx = context();
  if (!ready) ctx.objective = nullptr;

  Proposal proposal;
  bool improved = false;
  for (int attempt = 0; attempt < 2 && !improved; ++attempt) {
    proposal = propose_next(ctx, config_.optimizer,
                            derive_seed(config_.seed, kProposal, static_cast<std::uint64_t>(evaluations_) * 4 + attempt));
    improved = proposal.improvement;
    if (!improved) {
      ++state_.beta_count;
      ctx.omega = state_.update_omega(regions, d);
    }
  }
  Eigen::VectorXd u = improved ? proposal.x : proposal.fallback_x;
  std::optional<std::pair<std::size_t, double>> dominant;
  if (config_.mode == DescriptorMode::BlackBox && ctx.objective) dominant = ctx.explain(u).dominant_region();
  evaluate_and_record(u, improved ? proposal.value : 0.0, dominant);
  ++state_.t;
  state_.update_omega(archive_.grid().region_count(), d);
  trace_.back().omega = state_.omega;
  trace_.back().alpha = state_.alpha_count;
  trace_.back().beta = state_.beta_count;
  maybe_switch_grid();
  if (!done()) refresh_models();
}

void BopElites::run() {
  if (evaluations_ == 0) initialize();
  while (!done()) step();
  // Final models include every observation.
  refresh_models();
}

void BopElites::evaluate_and_record(const Eigen::VectorXd& u, double acquisition,
                                    const std::optional<std::pair<std::size_t, double>>& dominant) {
  const Eigen::VectorXd x = problem_.input_box.from_unit(u);
  const Evaluation e = problem_.evaluate(x);
  Observation obs{x, e.y, e.b, e.valid, evaluations_};
  archive_.offer(obs);

  unit_inputs_.conservativeResize(unit_inputs_.rows() + 1, Eigen::NoChange);
  unit_inputs_.row(unit_inputs_.rows() - 1) = problem_.input_box.to_unit(x).transpose();
  valid_.push_back(e.valid);
  observations_.push_back(obs);

  std::optional<std::size_t> region;
  if (e.valid) region = archive_.grid().flat_index(e.b);
  if (dominant && e.valid && dominant->second > 0.5 && region != dominant->first) ++state_.alpha_count;

  TraceRecord rec;
  rec.iteration = evaluations_;
  rec.x = x;
  rec.y = e.y;
  rec.b = e.b;
  rec.valid = e.valid;
  rec.region = region;
  rec.qd_score = archive_.qd_score();
  rec.omega = state_.omega;
  rec.alpha = state_.alpha_count;
  rec.beta = state_.beta_count;
  rec.acquisition = acquisition;
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time_).count();
  trace_.push_back(std::move(rec));
  ++evaluations_;
}

void BopElites::maybe_switch_grid() {
  if (!config_.initial_upscaling || archive_.grid().region_count() == target_grid_.region_count()) return;
  if (evaluations_ < coarse_until_) return;
  archive_ = archive_.rebinned(target_grid_);
  state_.update_omega(target_grid_.region_count(), problem_.input_dim());
}

void BopElites::refresh_models() {
  if (config_.use_feasibility) {
    FeasibilityOptions fo = config_.feasibility;
    fo.seed = derive_seed(config_.seed, kFeasibility);
    models_.feasibility = fit_feasibility(unit_inputs_, valid_, fo);
  }
  fitter_.update(unit_inputs_, observations_, evaluations_, models_);
}

RunResult run_bop_elites(const Problem& problem, const RunConfig& config) {
  BopElites loop(problem, config);
  loop.run();
  RunResult r;
  r.config = loop.config();
  r.archive = loop.archive();
  r.models = loop.models();
  r.state = loop.state();
  r.trace = loop.trace();
  r.evaluations = loop.evaluations();
  r.wall_seconds = r.trace.empty() ? 0.0 : r.trace.back().wall_seconds;
  return r;
}

}  // namespace bope
