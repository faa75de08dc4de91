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

#include "bopelites/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "bopelites/gp.hpp"
#include "bopelites/sobol.hpp"

namespace bope {

ObjectiveAndDescriptors mishra(double x1, double x2) {
  if (!(x1 >= -10.0 && x1 <= 0.0 && x2 >= -6.5 && x2 <= 0.0))
    throw std::domain_error("mishra: input outside [-10,0] x [-6.5,0]");
  const double a = std::sin(x2) * std::exp(std::pow(1.0 - std::cos(x1), 2));
  const double b = std::cos(x1) * std::exp(std::pow(1.0 - std::sin(x2), 2));
  const double c = (x1 - x2) * (x1 - x2);
  ObjectiveAndDescriptors out;
  out.y = a + b + c;
  out.b = Eigen::Vector2d(-x1, -x2);
  return out;
}

ObjectiveAndDescriptors robot_arm(const Eigen::VectorXd& x) {
  const auto n = static_cast<double>(x.size());
  if (x.size() == 0) throw std::invalid_argument("robot_arm: empty input");
  const double mean = x.mean();
  const double spread = std::sqrt((x.array() - mean).square().sum() / n);
  double angle = 0.0, sx = 0.0, cx = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    angle += 2.0 * std::numbers::pi * x[i] - std::numbers::pi;
    sx += std::sin(angle);
    cx += std::cos(angle);
  }
  ObjectiveAndDescriptors out;
  out.y = 1.0 - spread;
  out.b = Eigen::Vector2d(sx / (2.0 * n) + 0.5, cx / (2.0 * n) + 0.5);
  return out;
}

ObjectiveAndDescriptors rosenbrock6(const Eigen::VectorXd& x) {
  if (x.size() != 6) throw std::invalid_argument("rosenbrock6: expects six inputs");
  double y = 0.0;
  for (int i = 0; i < 6; i += 2) {
    const double q = 2.0 * x[i + 1] * x[i + 1];
    const double u = 2.0 * x[i] - q;
    y += 100.0 * (u * u + (1.0 - q));
  }
  ObjectiveAndDescriptors out;
  out.y = y;
  out.b = Eigen::Vector2d(0.5 * (x[0] + x[1]), (x[2] - 1.0) * (x[2] - 1.0));
  return out;
}

Problem mishra_problem() {
  Problem p;
  p.id = "mishra";
  p.input_box = Box{Eigen::Vector2d(-10.0, -6.5), Eigen::Vector2d(0.0, 0.0)};
  p.descriptor_box = Box{Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(10.0, 6.5)};
  p.objective = [](const Eigen::VectorXd& x) { return mishra(x[0], x[1]).y - kMishraMinimum; };
  p.descriptors = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return mishra(x[0], x[1]).b; };
  p.default_resolution = {10, 10};
  return p;
}

Problem robot_arm_problem() {
  Problem p;
  p.id = "robot_arm";
  p.input_box = Box{Eigen::VectorXd::Zero(4), Eigen::VectorXd::Ones(4)};
  p.descriptor_box = Box{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2)};
  p.objective = [](const Eigen::VectorXd& x) { return robot_arm(x).y; };
  p.descriptors = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return robot_arm(x).b; };
  p.default_resolution = {10, 10};
  return p;
}

Problem rosenbrock6_problem() {
  Problem p;
  p.id = "rosenbrock6";
  p.input_box = Box{Eigen::VectorXd::Zero(6), Eigen::VectorXd::Ones(6)};
  p.descriptor_box = Box{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2)};
  p.objective = [](const Eigen::VectorXd& x) { return rosenbrock6(x).y; };
  p.descriptors = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return rosenbrock6(x).b; };
  p.default_resolution = {10, 10};
  return p;
}

Problem invalid_disk_problem() {
  Problem p;
  p.id = "invalid_disk";
  p.input_box = Box{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2)};
  p.descriptor_box = Box{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2)};
  p.objective = [](const Eigen::VectorXd& u) {
    return mishra(std::clamp(-10.0 + 10.0 * u[0], -10.0, 0.0), std::clamp(-6.5 + 6.5 * u[1], -6.5, 0.0)).y -
           kMishraMinimum;
  };
  p.descriptors = [](const Eigen::VectorXd& u) -> Eigen::VectorXd { return u; };
  p.validity = [](const Eigen::VectorXd& u) {
    const double dx = u[0] - 0.3, dy = u[1] - 0.3;
    return dx * dx + dy * dy >= 0.04;
  };
  p.default_resolution = {10, 10};
  return p;
}

namespace {

// f(x) = k(x, anchors) K^-1 f_anchors for one prior draw.
struct Realization {
  Eigen::MatrixXd anchors;
  KernelParams params;
  Eigen::VectorXd weights;
  Eigen::VectorXd anchor_values;

  double operator()(const Eigen::VectorXd& u) const {
    return (cross_kernel(u.transpose(), anchors, params) * weights)(0, 0);
  }
  Eigen::VectorXd batch(const Eigen::MatrixXd& u) const { return cross_kernel(u, anchors, params) * weights; }
};

Realization draw_realization(const Eigen::MatrixXd& anchors, double lengthscale, std::mt19937_64& rng) {
  Realization r;
  r.anchors = anchors;
  r.params.lengthscales = Eigen::VectorXd::Constant(anchors.cols(), lengthscale);
  r.params.signal_variance = 1.0;
  Eigen::MatrixXd k = cross_kernel(anchors, anchors, r.params);
  k.diagonal().setOnes();
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (double eps = 1e-10;; eps *= 10.0) {
    if (eps > 1e-3) throw std::runtime_error("synthetic_gp_problem: anchor covariance is singular");
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += eps;
    llt.compute(kj);
    if (llt.info() == Eigen::Success) break;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(anchors.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  r.anchor_values = llt.matrixL() * z;
  r.weights = llt.solve(r.anchor_values);
  return r;
}

}  // namespace

Problem synthetic_gp_problem(const SyntheticGpSpec& spec) {
  if (spec.input_dim < 1 || spec.descriptor_count < 1 || spec.anchor_count < 2 || spec.probe_count < 2)
    throw std::invalid_argument("synthetic_gp_problem: invalid spec");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> ls(spec.lengthscale_min, spec.lengthscale_max);

  ScrambledSobol anchor_seq(spec.input_dim, spec.seed ^ 0x5eedA11CEull);
  const Eigen::MatrixXd anchors = anchor_seq.draw(spec.anchor_count);

  auto objective = std::make_shared<Realization>(draw_realization(anchors, ls(rng), rng));
  auto descriptors = std::make_shared<std::vector<Realization>>();
  for (int k = 0; k < spec.descriptor_count; ++k) descriptors->push_back(draw_realization(anchors, ls(rng), rng));

  ScrambledSobol probe_seq(spec.input_dim, spec.seed ^ 0x9a0be5ull);
  const Eigen::MatrixXd probes = probe_seq.draw(spec.probe_count);
  Eigen::VectorXd lo(spec.descriptor_count), hi(spec.descriptor_count);
  for (int k = 0; k < spec.descriptor_count; ++k) {
    Eigen::VectorXd v = (*descriptors)[static_cast<std::size_t>(k)].batch(probes);
    lo[k] = v.minCoeff();
    hi[k] = v.maxCoeff();
  }

  Problem p;
  std::ostringstream id;
  id << "synthetic_gp:" << spec.seed << ":" << spec.descriptor_count;
  p.id = id.str();
  p.input_box = Box{Eigen::VectorXd::Zero(spec.input_dim), Eigen::VectorXd::Ones(spec.input_dim)};
  p.descriptor_box = Box{lo, hi};
  p.objective = [objective](const Eigen::VectorXd& x) { return (*objective)(x); };
  p.descriptors = [descriptors](const Eigen::VectorXd& x) {
    Eigen::VectorXd b(static_cast<Eigen::Index>(descriptors->size()));
    for (std::size_t k = 0; k < descriptors->size(); ++k) b[static_cast<Eigen::Index>(k)] = (*descriptors)[k](x);
    return b;
  };
  p.default_resolution.assign(static_cast<std::size_t>(spec.descriptor_count), 10);
  return p;
}

Problem make_problem(const std::string& id) {
  if (id == "mishra") return mishra_problem();
  if (id == "robot_arm") return robot_arm_problem();
  if (id == "rosenbrock6") return rosenbrock6_problem();
  if (id == "invalid_disk") return invalid_disk_problem();
  const std::string prefix = "synthetic_gp:";
  if (id.rfind(prefix, 0) == 0) {
    SyntheticGpSpec spec;
    std::string rest = id.substr(prefix.size());
    const auto colon = rest.find(':');
    try {
      spec.seed = std::stoull(rest.substr(0, colon));
      if (colon != std::string::npos) spec.descriptor_count = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("make_problem: malformed synthetic_gp id '" + id + "'");
    }
    return synthetic_gp_problem(spec);
  }
  throw std::invalid_argument("make_problem: unknown problem '" + id + "'");
}

}  // namespace bope
