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
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "bopelites/pattern_search.hpp"

namespace bope {

/// Matérn-5/2 ARD hyperparameters: one lengthscale per input dimension and a
/// signal variance.
struct KernelParams {
  Eigen::VectorXd lengthscales;
  double signal_variance = 1.0;

  /// Throws std::invalid_argument if any value is non-positive or non-finite,
  /// or if `dim` is given and does not match.
  void validate(Eigen::Index dim = -1) const;
};

/// k(a,b) = s2 (1 + sqrt5 r + 5 r^2 / 3) exp(-sqrt5 r), r^2 = sum_d ((a_d - b_d) / l_d)^2.
double kernel_eval(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const KernelParams& params);

/// Kernel matrix between the rows of `a` and the rows of `b`.
Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                             const KernelParams& params);

struct Posterior {
  double mean = 0.0;
  double std = 0.0;
};

class GpFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GpFitOptions {
  int restarts = 8;
  double lengthscale_min = 0.005;
  double lengthscale_max = 4.0;
  double signal_variance_min = 0.05;
  double signal_variance_max = 20.0;
  double initial_jitter = 1e-8;
  double max_jitter = 1e-4;
  // Hyperparameters are searched on at most this many points (a seeded random
  // subset); the returned model is always conditioned on all points.
  int max_fit_points = 300;
  std::uint64_t seed = 0;
  std::optional<KernelParams> warm_start;
  // Operates on log-lengthscales rescaled to [0,1].
  PatternSearchConfig search{0.1, 0.5, 100, 1500, 1e-3};
};

/// Log marginal likelihood of zero-mean targets under K = s2 (C + eps I),
/// escalating eps by 10x from `initial_jitter` to `max_jitter` until the
/// factorisation succeeds. Returns -inf if it never does.
double log_marginal_likelihood(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                               const KernelParams& params, double initial_jitter = 1e-8,
                               double max_jitter = 1e-4);

/// Noise-free GP posterior over one scalar function.
///
/// Inputs live in the unit box; targets are z-scored internally and the prior
/// mean is zero in standardised space. Predictions are returned on the
/// original target scale. Instances are immutable after construction.
class GpModel {
 public:
  /// Fits hyperparameters by multi-start pattern search on the log marginal
  /// likelihood. The signal variance is profiled out in closed form.
  static GpModel fit(Eigen::MatrixXd inputs, Eigen::VectorXd targets, const GpFitOptions& options = {});

  /// Conditions on the data with fixed hyperparameters.
  static GpModel condition(Eigen::MatrixXd inputs, Eigen::VectorXd targets, KernelParams params,
                           double initial_jitter = 1e-8, double max_jitter = 1e-4);

  Posterior predict(const Eigen::VectorXd& x) const;
  void predict_batch(const Eigen::MatrixXd& points, Eigen::VectorXd& mean, Eigen::VectorXd& std) const;
  Eigen::VectorXd predict_mean_batch(const Eigen::MatrixXd& points) const;

  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& targets() const { return targets_; }
  const KernelParams& params() const { return params_; }
  double jitter() const { return jitter_; }
  double target_mean() const { return target_mean_; }
  double target_scale() const { return target_scale_; }
  double log_marginal_likelihood() const { return lml_; }
  Eigen::Index dim() const { return inputs_.cols(); }
  Eigen::Index size() const { return inputs_.rows(); }

  /// Lower Cholesky factor of K(X,X) + jitter * s2 * I in standardised space.
  const Eigen::MatrixXd& factor() const { return factor_; }
  /// K^-1 (Y - m) in standardised space.
  const Eigen::VectorXd& weights() const { return weights_; }

 private:
  GpModel() = default;
  void factorize(double initial_jitter, double max_jitter);

  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  Eigen::VectorXd standardized_;
  KernelParams params_;
  double jitter_ = 0.0;
  double target_mean_ = 0.0;
  double target_scale_ = 1.0;
  double lml_ = 0.0;
  Eigen::MatrixXd factor_;
  Eigen::VectorXd weights_;
};

}  // namespace bope
