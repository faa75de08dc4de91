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

#include <cmath>
#include <random>

#include <doctest.h>

#include "bopelites/gp.hpp"
#include "bopelites/sobol.hpp"

using namespace bope;

namespace {

KernelParams iso(int d, double l, double s2 = 1.0) {
  KernelParams p;
  p.lengthscales = Eigen::VectorXd::Constant(d, l);
  p.signal_variance = s2;
  return p;
}

}  // namespace

TEST_SUITE("gp") {
  TEST_CASE("kernel at unit scaled distance") {
    // (1 + sqrt5 + 5/3) exp(-sqrt5)
    const double oracle = 0.5239941088318203;
    Eigen::VectorXd a(2), b(2);
    a << 0.0, 0.0;
    b << 0.3, 0.0;
    CHECK(kernel_eval(a, b, iso(2, 0.3)) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(kernel_eval(a, a, iso(2, 0.3, 2.5)) == doctest::Approx(2.5));
  }

  TEST_CASE("ard lengthscales scale each axis") {
    KernelParams p;
    p.lengthscales = Eigen::Vector2d(0.5, 2.0);
    Eigen::VectorXd a = Eigen::Vector2d(0.0, 0.0), b = Eigen::Vector2d(0.5, 2.0);
    // r = sqrt(2)
    const double r = std::sqrt(2.0);
    const double expect = (1 + std::sqrt(5.0) * r + 5.0 * r * r / 3.0) * std::exp(-std::sqrt(5.0) * r);
    CHECK(kernel_eval(a, b, p) == doctest::Approx(expect));
  }

  TEST_CASE("params validation") {
    KernelParams p = iso(2, 0.1);
    CHECK_NOTHROW(p.validate(2));
    CHECK_THROWS_AS(p.validate(3), std::invalid_argument);
    p.lengthscales[1] = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }

  TEST_CASE("posterior matches a dense solve") {
    ScrambledSobol s(3, 7);
    const Eigen::MatrixXd x = s.draw(25);
    Eigen::VectorXd y(25);
    for (int i = 0; i < 25; ++i) y[i] = std::sin(4 * x(i, 0)) + x(i, 1) * x(i, 2) + 3.0;
    const KernelParams p = iso(3, 0.4, 1.3);
    const GpModel gp = GpModel::condition(x, y, p);

    const Eigen::MatrixXd c = cross_kernel(x, x, p) / p.signal_variance;
    const Eigen::MatrixXd q = s.draw(10);
    const Eigen::MatrixXd kq = cross_kernel(q, x, p) / p.signal_variance;
    const double m = gp.target_mean(), sc = gp.target_scale();
    const Eigen::VectorXd alpha = c.fullPivLu().solve((y.array() - m).matrix());
    for (int i = 0; i < q.rows(); ++i) {
      const Eigen::VectorXd k = kq.row(i).transpose();
      const double mean = m + k.dot(alpha);
      const double var = sc * sc * p.signal_variance * (1.0 - k.dot(c.fullPivLu().solve(k)));
      const Posterior post = gp.predict(q.row(i).transpose());
      CHECK(post.mean == doctest::Approx(mean).epsilon(1e-6));
      CHECK(post.std == doctest::Approx(std::sqrt(std::max(var, 0.0))).epsilon(1e-4));
    }
  }

  TEST_CASE("interpolates training data") {
    ScrambledSobol s(2, 3);
    const Eigen::MatrixXd x = s.draw(30);
    Eigen::VectorXd y(30);
    for (int i = 0; i < 30; ++i) y[i] = x(i, 0) * x(i, 0) - x(i, 1);
    const GpModel gp = GpModel::fit(x, y);
    Eigen::VectorXd mu, sd;
    gp.predict_batch(x, mu, sd);
    CHECK((mu - y).cwiseAbs().maxCoeff() < 1e-4);
    CHECK(sd.maxCoeff() < 1e-2);
    CHECK(gp.log_marginal_likelihood() > -1e300);
  }

  TEST_CASE("batch and single predictions agree") {
    ScrambledSobol s(4, 11);
    const Eigen::MatrixXd x = s.draw(20);
    const Eigen::VectorXd y = x.rowwise().sum();
    const GpModel gp = GpModel::condition(x, y, iso(4, 0.5));
    const Eigen::MatrixXd q = s.draw(5);
    Eigen::VectorXd mu, sd;
    gp.predict_batch(q, mu, sd);
    for (int i = 0; i < 5; ++i) {
      const auto p = gp.predict(q.row(i).transpose());
      CHECK(p.mean == doctest::Approx(mu[i]));
      CHECK(p.std == doctest::Approx(sd[i]));
    }
    CHECK((gp.predict_mean_batch(q) - mu).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("duplicate inputs survive via jitter") {
    Eigen::MatrixXd x(3, 1);
    x << 0.2, 0.2, 0.7;
    Eigen::VectorXd y(3);
    y << 1.0, 1.0, 2.0;
    const GpModel gp = GpModel::condition(x, y, iso(1, 0.3));
    CHECK(gp.jitter() >= 1e-8);
    CHECK(gp.predict(Eigen::VectorXd::Constant(1, 0.2)).mean == doctest::Approx(1.0).epsilon(1e-3));
  }

  TEST_CASE("fitting is seed deterministic") {
    ScrambledSobol s(2, 5);
    const Eigen::MatrixXd x = s.draw(40);
    const Eigen::VectorXd y = (3 * x.col(0)).array().cos() + x.col(1).array();
    GpFitOptions o;
    o.seed = 9;
    const GpModel a = GpModel::fit(x, y, o), b = GpModel::fit(x, y, o);
    CHECK(a.params().lengthscales == b.params().lengthscales);
    CHECK(a.params().signal_variance == b.params().signal_variance);
  }
}

TEST_SUITE("gp") {
  TEST_CASE("fitted likelihood beats random hyperparameters") {
    ScrambledSobol s(3, 21);
    const Eigen::MatrixXd x = s.draw(50);
    const Eigen::VectorXd y = (5 * x.col(0)).array().sin() + x.col(1).array().square() - x.col(2).array();
    const GpModel gp = GpModel::fit(x, y);
    const Eigen::VectorXd z = (y.array() - gp.target_mean()) / gp.target_scale();
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> logl(std::log(0.005), std::log(4.0)), s2(0.05, 20.0);
    for (int i = 0; i < 100; ++i) {
      KernelParams p;
      p.lengthscales = Eigen::VectorXd(3);
      for (int k = 0; k < 3; ++k) p.lengthscales[k] = std::exp(logl(rng));
      p.signal_variance = s2(rng);
      CHECK(gp.log_marginal_likelihood() >= log_marginal_likelihood(x, z, p) - 1e-9);
    }
  }
}
