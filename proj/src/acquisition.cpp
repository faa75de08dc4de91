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

#include "bopelites/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace bope {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double upper_tail(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

bool degenerate(const Posterior& p) { return !(p.std > 0.0) || !std::isfinite(p.std); }

// Membership probabilities of every partition along dimension j.
void partition_masses(const Posterior& p, const RegionGrid& grid, int j, std::vector<double>& out) {
  const int n = grid.partitions()[static_cast<std::size_t>(j)];
  out.assign(static_cast<std::size_t>(n), 0.0);
  if (degenerate(p)) {
    const int k = grid.partition_of(j, p.mean);
    if (k >= 0) out[static_cast<std::size_t>(k)] = 1.0;
    return;
  }
  for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = partition_probability(p, grid.edge(j, k), grid.edge(j, k + 1));
}

struct Enumerator {
  const std::vector<std::vector<std::pair<int, double>>>& candidates;
  const RegionGrid& grid;
  double threshold;
  std::vector<std::pair<std::size_t, double>>& out;
  std::vector<std::size_t> strides;

  void run(std::size_t dim, std::size_t flat, double prob) {
    if (dim == candidates.size()) {
      if (prob > threshold) out.emplace_back(flat, prob);
      return;
    }
    for (const auto& [k, p] : candidates[dim]) {
      const double q = prob * p;
      if (!(q > threshold)) continue;
      run(dim + 1, flat + static_cast<std::size_t>(k) * strides[dim], q);
    }
  }
};

}  // namespace

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double ucb(const Posterior& objective, double beta_ucb) {
  if (beta_ucb < 0.0) throw std::invalid_argument("ucb: beta must be non-negative");
  return objective.mean + beta_ucb * objective.std;
}

double ei_region(const Posterior& objective, std::optional<double> elite_value) {
  const double incumbent = elite_value.value_or(0.0);
  const double diff = objective.mean - incumbent;
  if (degenerate(objective)) return std::max(diff, 0.0);
  const double z = diff / objective.std;
  const double ei = diff * normal_cdf(z) + objective.std * normal_pdf(z);
  return std::max(ei, 0.0);
}

double partition_probability(const Posterior& descriptor, double lb, double ub) {
  if (!(lb < ub)) throw std::invalid_argument("partition_probability: need lb < ub");
  if (degenerate(descriptor)) return (descriptor.mean >= lb && descriptor.mean < ub) ? 1.0 : 0.0;
  const double zl = (lb - descriptor.mean) / descriptor.std;
  const double zu = (ub - descriptor.mean) / descriptor.std;
  // Difference of the smaller tails keeps precision far from the mean.
  const double p = zl > 0.0 ? upper_tail(zl) - upper_tail(zu) : normal_cdf(zu) - normal_cdf(zl);
  return std::clamp(p, 0.0, 1.0);
}

double region_probability(std::span<const Posterior> descriptors, const RegionGrid& grid, std::size_t region) {
  if (static_cast<int>(descriptors.size()) != grid.dims())
    throw std::invalid_argument("region_probability: one posterior per descriptor dimension required");
  const auto multi = grid.unflatten(region);
  double p = 1.0;
  for (int j = 0; j < grid.dims(); ++j) {
    const auto& post = descriptors[static_cast<std::size_t>(j)];
    const int k = multi[static_cast<std::size_t>(j)];
    if (degenerate(post))
      p *= grid.partition_of(j, post.mean) == k ? 1.0 : 0.0;
    else
      p *= partition_probability(post, grid.edge(j, k), grid.edge(j, k + 1));
  }
  return p;
}

void region_probabilities_above(std::span<const Posterior> descriptors, const RegionGrid& grid, double threshold,
                                std::vector<std::pair<std::size_t, double>>& out) {
  if (static_cast<int>(descriptors.size()) != grid.dims())
    throw std::invalid_argument("region_probabilities_above: one posterior per descriptor dimension required");
  out.clear();
  const double thr = std::max(threshold, 0.0);
  std::vector<std::vector<std::pair<int, double>>> candidates(descriptors.size());
  std::vector<double> masses;
  std::vector<std::size_t> strides(descriptors.size(), 1);
  for (std::size_t j = descriptors.size(); j-- > 0;) {
    if (j + 1 < descriptors.size())
      strides[j] = strides[j + 1] * static_cast<std::size_t>(grid.partitions()[j + 1]);
  }
  for (std::size_t j = 0; j < descriptors.size(); ++j) {
    partition_masses(descriptors[j], grid, static_cast<int>(j), masses);
    for (std::size_t k = 0; k < masses.size(); ++k)
      if (masses[k] > thr) candidates[j].emplace_back(static_cast<int>(k), masses[k]);
    if (candidates[j].empty()) return;
  }
  Enumerator e{candidates, grid, thr, out, strides};
  e.run(0, 0, 1.0);
}

double cutoff_omega(long alpha, long beta, long t, std::size_t region_count, int input_dim) {
  if (region_count < 2) return 0.0;
  const double denom = std::max<double>(static_cast<double>(alpha - 2 * beta + t), 1.0);
  const double gamma = std::sqrt(10.0 * input_dim / denom);
  return 0.5 * std::pow(2.0 / static_cast<double>(region_count), gamma);
}

AcquisitionState AcquisitionState::initial(std::size_t region_count, int input_dim) {
  AcquisitionState s;
  s.init_budget = 10L * input_dim;
  s.t = s.init_budget;
  s.update_omega(region_count, input_dim);
  return s;
}

double AcquisitionState::update_omega(std::size_t region_count, int input_dim) {
  omega = cutoff_omega(alpha_count, beta_count, t, region_count, input_dim);
  return omega;
}

double update_omega(AcquisitionState& state, std::size_t region_count, int input_dim) {
  return state.update_omega(region_count, input_dim);
}

std::optional<std::pair<std::size_t, double>> EjieEvaluation::dominant_region() const {
  double total = 0.0;
  for (const auto& c : retained) total += c.probability * c.ei;
  if (!(total > 0.0)) return std::nullopt;
  std::pair<std::size_t, double> best{0, -1.0};
  for (const auto& c : retained) {
    const double share = c.probability * c.ei / total;
    if (share > best.second) best = {c.region, share};
  }
  return best;
}

double ejie(const Posterior& objective, std::span<const Posterior> descriptors, const Archive& archive) {
  std::vector<std::pair<std::size_t, double>> probs;
  region_probabilities_above(descriptors, archive.grid(), 0.0, probs);
  double total = 0.0;
  for (const auto& [r, p] : probs) total += p * ei_region(objective, archive.elite_value(r));
  return total;
}

EjieEvaluation ejie_plus_detail(const Posterior& objective, std::span<const Posterior> descriptors,
                                const Archive& archive, double omega) {
  EjieEvaluation out;
  std::vector<std::pair<std::size_t, double>> probs;
  region_probabilities_above(descriptors, archive.grid(), omega, probs);
  double weighted = 0.0;
  for (const auto& [r, p] : probs) {
    const double ei = ei_region(objective, archive.elite_value(r));
    out.retained.push_back(RegionContribution{r, p, ei});
    out.retained_mass += p;
    weighted += p * ei;
  }
  out.value = out.retained_mass > 0.0 ? weighted / out.retained_mass : 0.0;
  return out;
}

double ejie_plus(const Posterior& objective, std::span<const Posterior> descriptors, const Archive& archive,
                 double omega) {
  return ejie_plus_detail(objective, descriptors, archive, omega).value;
}

Eigen::MatrixXd FeasibilityModel::features(const Eigen::MatrixXd& points) const {
  const double scale = std::sqrt(2.0 / static_cast<double>(frequencies_.rows()));
  Eigen::MatrixXd z = points * frequencies_.transpose();
  z.rowwise() += phases_.transpose();
  return scale * z.array().cos().matrix();
}

double FeasibilityModel::probability(const Eigen::VectorXd& x) const {
  if (!active_) return 1.0;
  return probability_batch(x.transpose())[0];
}

Eigen::VectorXd FeasibilityModel::probability_batch(const Eigen::MatrixXd& points) const {
  if (!active_) return Eigen::VectorXd::Ones(points.rows());
  const Eigen::ArrayXd z = (features(points) * weights_).array() + bias_;
  return (1.0 / (1.0 + (-z).exp())).matrix();
}

FeasibilityModel fit_feasibility(const Eigen::MatrixXd& inputs, const std::vector<bool>& valid,
                                 const FeasibilityOptions& options) {
  if (static_cast<std::size_t>(inputs.rows()) != valid.size())
    throw std::invalid_argument("fit_feasibility: input/label count mismatch");
  FeasibilityModel m;
  const auto n_valid = std::count(valid.begin(), valid.end(), true);
  if (n_valid == 0 || n_valid == static_cast<long>(valid.size())) return m;

  const Eigen::Index n = inputs.rows();
  const Eigen::Index d = inputs.cols();
  const int nf = options.features;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0 / options.lengthscale);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  m.frequencies_.resize(nf, d);
  for (int i = 0; i < nf; ++i)
    for (Eigen::Index k = 0; k < d; ++k) m.frequencies_(i, k) = normal(rng);
  m.phases_.resize(nf);
  for (int i = 0; i < nf; ++i) m.phases_[i] = phase(rng);

  Eigen::MatrixXd phi(n, nf + 1);
  phi.leftCols(nf) = m.features(inputs);
  phi.col(nf).setOnes();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = valid[static_cast<std::size_t>(i)] ? 1.0 : 0.0;

  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(nf + 1, options.l2);
  penalty[nf] = 1e-10;
  auto loss = [&](const Eigen::VectorXd& theta) {
    const Eigen::ArrayXd z = (phi * theta).array();
    // log(1 + e^z) - y z, computed stably.
    const Eigen::ArrayXd softplus = z.max(0.0) + (-z.abs()).exp().log1p();
    return (softplus - y.array() * z).sum() + 0.5 * (penalty.array() * theta.array().square()).sum();
  };

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(nf + 1);
  double current = loss(theta);
  for (int it = 0; it < options.max_newton_steps; ++it) {
    const Eigen::ArrayXd z = (phi * theta).array();
    const Eigen::ArrayXd p = 1.0 / (1.0 + (-z).exp());
    const Eigen::VectorXd grad = phi.transpose() * (p - y.array()).matrix() + (penalty.array() * theta.array()).matrix();
    const Eigen::ArrayXd w = (p * (1.0 - p)).max(1e-12);
    Eigen::MatrixXd hess = phi.transpose() * (phi.array().colwise() * w).matrix();
    hess.diagonal() += penalty;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    double t = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      const Eigen::VectorXd cand = theta - t * step;
      const double l = loss(cand);
      if (l < current) {
        theta = cand;
        const double gain = current - l;
        current = l;
        improved = gain > 1e-10 * std::max(1.0, std::abs(current));
        break;
      }
    }
    if (!improved || step.lpNorm<Eigen::Infinity>() * t < 1e-9) break;
  }
  m.weights_ = theta.head(nf);
  m.bias_ = theta[nf];
  m.active_ = true;
  return m;
}

double ejie_plus_plus(double ejie_plus_value, const FeasibilityModel& feasibility, const Eigen::VectorXd& x) {
  if (!feasibility.active()) return ejie_plus_value;
  return ejie_plus_value * feasibility.probability(x);
}

double ejie_plus(const Eigen::VectorXd& x, const GpModel& objective, std::span<const GpModel> descriptors,
                 const Archive& archive, const AcquisitionState& state) {
  std::vector<Posterior> desc;
  desc.reserve(descriptors.size());
  for (const auto& m : descriptors) desc.push_back(m.predict(x));
  return ejie_plus(objective.predict(x), desc, archive, state.omega);
}

double ejie_plus_plus(const Eigen::VectorXd& x, const GpModel& objective, std::span<const GpModel> descriptors,
                      const Archive& archive, const AcquisitionState& state, const FeasibilityModel& feasibility) {
  return ejie_plus_plus(ejie_plus(x, objective, descriptors, archive, state), feasibility, x);
}

}  // namespace bope
