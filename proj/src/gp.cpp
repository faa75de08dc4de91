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

#include "bopelites/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace bope {

namespace {

constexpr double kSqrt5 = 2.2360679774997896964;
constexpr double kLog2Pi = 1.8378770664093454836;

void matern52_inplace(Eigen::MatrixXd& r2, double signal_variance) {
  r2 = r2.cwiseMax(0.0);
  auto a = r2.array();
  a = signal_variance * (1.0 + kSqrt5 * a.sqrt() + (5.0 / 3.0) * a) * (-kSqrt5 * a.sqrt()).exp();
}

struct Standardization {
  double mean = 0.0;
  double scale = 1.0;
};

Standardization standardize(const Eigen::VectorXd& y) {
  Standardization s;
  const auto n = y.size();
  if (n == 0) return s;
  s.mean = y.mean();
  if (n >= 2) {
    const double var = (y.array() - s.mean).square().sum() / static_cast<double>(n - 1);
    const double sd = std::sqrt(var);
    if (sd > 1e-12 * std::max(1.0, std::abs(s.mean))) s.scale = sd;
  }
  return s;
}

// Cholesky of C + eps I with escalating eps. Returns the eps used, or nullopt.
std::optional<double> factorize_correlation(const Eigen::MatrixXd& corr, double initial_jitter,
                                            double max_jitter, Eigen::LLT<Eigen::MatrixXd>& llt) {
  const Eigen::Index n = corr.rows();
  for (double eps = initial_jitter; eps <= max_jitter * (1.0 + 1e-9); eps *= 10.0) {
    Eigen::MatrixXd k = corr;
    k.diagonal().array() += eps;
    llt.compute(k);
    if (llt.info() == Eigen::Success) {
      const auto& l = llt.matrixLLT();
      bool finite = true;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) {
          finite = false;
          break;
        }
      }
      if (finite) return eps;
    }
  }
  return std::nullopt;
}

struct LmlTerms {
  double quad = 0.0;     // y^T (C + eps I)^-1 y
  double log_det = 0.0;  // log |C + eps I|
  bool ok = false;
};

LmlTerms correlation_terms(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& lengthscales, double initial_jitter, double max_jitter) {
  LmlTerms t;
  KernelParams unit{lengthscales, 1.0};
  Eigen::MatrixXd corr = cross_kernel(inputs, inputs, unit);
  corr.diagonal().setOnes();
  Eigen::LLT<Eigen::MatrixXd> llt;
  if (!factorize_correlation(corr, initial_jitter, max_jitter, llt)) return t;
  const Eigen::VectorXd v = llt.matrixL().solve(y);
  t.quad = v.squaredNorm();
  t.log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  t.ok = std::isfinite(t.quad) && std::isfinite(t.log_det);
  return t;
}

double lml_from_terms(const LmlTerms& t, double signal_variance, Eigen::Index n) {
  const double nd = static_cast<double>(n);
  return -0.5 * t.quad / signal_variance - 0.5 * nd * std::log(signal_variance) - 0.5 * t.log_det -
         0.5 * nd * kLog2Pi;
}

bool has_two_distinct_rows(const Eigen::MatrixXd& x) {
  for (Eigen::Index i = 1; i < x.rows(); ++i)
    if (x.row(i) != x.row(0)) return true;
  return false;
}

}  // namespace

void KernelParams::validate(Eigen::Index dim) const {
  if (dim >= 0 && lengthscales.size() != dim)
    throw std::invalid_argument("KernelParams: lengthscale count does not match input dimension");
  for (Eigen::Index i = 0; i < lengthscales.size(); ++i)
    if (!(lengthscales[i] > 0.0) || !std::isfinite(lengthscales[i]))
      throw std::invalid_argument("KernelParams: lengthscales must be positive and finite");
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
    throw std::invalid_argument("KernelParams: signal variance must be positive and finite");
}

double kernel_eval(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const KernelParams& params) {
  if (a.size() != b.size() || a.size() != params.lengthscales.size())
    throw std::invalid_argument("kernel_eval: dimension mismatch");
  double r2 = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    // (a-b)^2 == (b-a)^2 bitwise, so the kernel is exactly symmetric.
    const double u = (a[k] - b[k]) / params.lengthscales[k];
    r2 += u * u;
  }
  const double r = std::sqrt(r2);
  return params.signal_variance * (1.0 + kSqrt5 * r + (5.0 / 3.0) * r2) * std::exp(-kSqrt5 * r);
}

Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const KernelParams& params) {
  if (a.cols() != params.lengthscales.size() || b.cols() != params.lengthscales.size())
    throw std::invalid_argument("cross_kernel: dimension mismatch");
  const Eigen::VectorXd inv = params.lengthscales.cwiseInverse();
  const Eigen::MatrixXd as = a * inv.asDiagonal();
  const Eigen::MatrixXd bs = b * inv.asDiagonal();
  Eigen::MatrixXd r2 = -2.0 * as * bs.transpose();
  r2.colwise() += as.rowwise().squaredNorm();
  r2.rowwise() += bs.rowwise().squaredNorm().transpose();
  matern52_inplace(r2, params.signal_variance);
  return r2;
}

double log_marginal_likelihood(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                               const KernelParams& params, double initial_jitter, double max_jitter) {
  params.validate(inputs.cols());
  if (inputs.rows() != targets.size()) throw std::invalid_argument("log_marginal_likelihood: size mismatch");
  const LmlTerms t = correlation_terms(inputs, targets, params.lengthscales, initial_jitter, max_jitter);
  if (!t.ok) return -std::numeric_limits<double>::infinity();
  return lml_from_terms(t, params.signal_variance, inputs.rows());
}

GpModel GpModel::condition(Eigen::MatrixXd inputs, Eigen::VectorXd targets, KernelParams params,
                           double initial_jitter, double max_jitter) {
  if (inputs.rows() != targets.size()) throw std::invalid_argument("GpModel: input/target count mismatch");
  if (inputs.rows() == 0) throw std::invalid_argument("GpModel: no data");
  if (!inputs.allFinite() || !targets.allFinite()) throw std::invalid_argument("GpModel: non-finite data");
  params.validate(inputs.cols());
  GpModel m;
  m.inputs_ = std::move(inputs);
  m.targets_ = std::move(targets);
  m.params_ = std::move(params);
  const Standardization s = standardize(m.targets_);
  m.target_mean_ = s.mean;
  m.target_scale_ = s.scale;
  m.standardized_ = (m.targets_.array() - s.mean) / s.scale;
  m.factorize(initial_jitter, max_jitter);
  return m;
}

void GpModel::factorize(double initial_jitter, double max_jitter) {
  KernelParams unit{params_.lengthscales, 1.0};
  Eigen::MatrixXd corr = cross_kernel(inputs_, inputs_, unit);
  corr.diagonal().setOnes();
  Eigen::LLT<Eigen::MatrixXd> llt;
  const auto eps = factorize_correlation(corr, initial_jitter, max_jitter, llt);
  if (!eps) throw GpFitError("GpModel: Gram matrix is singular beyond the jitter limit");
  jitter_ = *eps;
  // K = s2 (C + eps I)  =>  L_K = sqrt(s2) L_C.
  factor_ = std::sqrt(params_.signal_variance) * Eigen::MatrixXd(llt.matrixL());
  weights_ = llt.solve(standardized_) / params_.signal_variance;
  LmlTerms t;
  t.quad = standardized_.dot(llt.solve(standardized_));
  t.log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  lml_ = lml_from_terms(t, params_.signal_variance, inputs_.rows());
}

GpModel GpModel::fit(Eigen::MatrixXd inputs, Eigen::VectorXd targets, const GpFitOptions& options) {
  if (inputs.rows() != targets.size()) throw std::invalid_argument("GpModel::fit: input/target count mismatch");
  if (inputs.rows() < 2 || !has_two_distinct_rows(inputs))
    throw GpFitError("GpModel::fit: need at least two distinct inputs");
  if (!inputs.allFinite() || !targets.allFinite()) throw std::invalid_argument("GpModel::fit: non-finite data");
  if (options.restarts < 1) throw std::invalid_argument("GpModel::fit: restarts must be positive");
  const Eigen::Index n = inputs.rows();
  const Eigen::Index d = inputs.cols();

  const Standardization s = standardize(targets);
  const Eigen::VectorXd ystd = (targets.array() - s.mean) / s.scale;

  std::mt19937_64 rng(options.seed);
  Eigen::MatrixXd fit_x = inputs;
  Eigen::VectorXd fit_y = ystd;
  if (options.max_fit_points > 1 && n > options.max_fit_points) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(options.max_fit_points));
    std::sort(idx.begin(), idx.end());
    fit_x.resize(options.max_fit_points, d);
    fit_y.resize(options.max_fit_points);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      fit_x.row(static_cast<Eigen::Index>(i)) = inputs.row(idx[i]);
      fit_y[static_cast<Eigen::Index>(i)] = ystd[idx[i]];
    }
  }

  const double lo = std::log(options.lengthscale_min);
  const double hi = std::log(options.lengthscale_max);
  auto to_lengthscales = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return (lo + u.array() * (hi - lo)).exp().matrix();
  };

  Eigen::MatrixXd starts(options.restarts, d);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int r = 0; r < options.restarts; ++r)
    for (Eigen::Index k = 0; k < d; ++k) starts(r, k) = unif(rng);
  if (options.warm_start && options.warm_start->lengthscales.size() == d) {
    const Eigen::VectorXd ws = options.warm_start->lengthscales.array().log();
    starts.row(0) = ((ws.array() - lo) / (hi - lo)).cwiseMax(0.0).cwiseMin(1.0).matrix().transpose();
  } else {
    // Lengthscale 0.2 in the unit box is a reasonable neutral first start.
    starts.row(0).setConstant(std::clamp((std::log(0.2) - lo) / (hi - lo), 0.0, 1.0));
  }

  auto profiled = [&](const Eigen::VectorXd& u, double* sv) {
    const LmlTerms t = correlation_terms(fit_x, fit_y, to_lengthscales(u), options.initial_jitter,
                                         options.max_jitter);
    if (!t.ok) return -std::numeric_limits<double>::infinity();
    const double s2 = std::clamp(t.quad / static_cast<double>(fit_x.rows()), options.signal_variance_min,
                                 options.signal_variance_max);
    if (sv) *sv = s2;
    return lml_from_terms(t, s2, fit_x.rows());
  };

  const BatchObjective objective = [&](const Eigen::MatrixXd& pts) {
    Eigen::VectorXd v(pts.rows());
    for (Eigen::Index i = 0; i < pts.rows(); ++i) v[i] = profiled(pts.row(i).transpose(), nullptr);
    return v;
  };
  const auto results = pattern_search_batch(objective, starts, options.search);

  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i].value > results[best].value) best = i;
  if (!std::isfinite(results[best].value))
    throw GpFitError("GpModel::fit: no hyperparameter setting admits a factorisation");

  KernelParams params;
  params.lengthscales = to_lengthscales(results[best].x);
  profiled(results[best].x, &params.signal_variance);
  return condition(std::move(inputs), std::move(targets), std::move(params), options.initial_jitter,
                   options.max_jitter);
}

Posterior GpModel::predict(const Eigen::VectorXd& x) const {
  Eigen::VectorXd mean, sd;
  predict_batch(x.transpose(), mean, sd);
  return Posterior{mean[0], sd[0]};
}

void GpModel::predict_batch(const Eigen::MatrixXd& points, Eigen::VectorXd& mean, Eigen::VectorXd& std) const {
  Eigen::MatrixXd ks = cross_kernel(inputs_, points, params_);
  mean = (ks.transpose() * weights_).array() * target_scale_ + target_mean_;
  factor_.triangularView<Eigen::Lower>().solveInPlace(ks);
  const Eigen::ArrayXd var = (params_.signal_variance - ks.colwise().squaredNorm().transpose().array()).cwiseMax(0.0);
  std = var.sqrt() * target_scale_;
}

Eigen::VectorXd GpModel::predict_mean_batch(const Eigen::MatrixXd& points) const {
  const Eigen::MatrixXd ks = cross_kernel(points, inputs_, params_);
  return ((ks * weights_).array() * target_scale_ + target_mean_).matrix();
}

}  // namespace bope
