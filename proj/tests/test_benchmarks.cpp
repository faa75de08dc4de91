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

#include <doctest.h>

#include "bopelites/benchmarks.hpp"
#include "bopelites/sobol.hpp"

using namespace bope;

TEST_SUITE("benchmarks") {
  TEST_CASE("mishra reference values") {
    // sin(0) e^(1-1)^2 + cos(0) e^(1-0)^2 + 0 = e
    const auto r = mishra(0.0, 0.0);
    CHECK(r.y == doctest::Approx(std::exp(1.0)));
    CHECK(r.b[0] == 0.0);
    CHECK(r.b[1] == 0.0);
    CHECK(mishra(-3.1302468, -1.5821422).y == doctest::Approx(kMishraMinimum).epsilon(1e-9));
    CHECK_THROWS_AS(mishra(1.0, 0.0), std::domain_error);
    const Problem p = mishra_problem();
    CHECK(p.objective(Eigen::Vector2d(0, 0)) == doctest::Approx(std::exp(1.0) - kMishraMinimum));
  }

  TEST_CASE("shifted mishra is non-negative") {
    const Problem p = mishra_problem();
    ScrambledSobol s(2, 3);
    const Eigen::MatrixXd u = s.draw(4096);
    for (int i = 0; i < u.rows(); ++i) CHECK(p.evaluate_unit(u.row(i).transpose()).y >= 0.0);
  }

  TEST_CASE("robot arm and rosenbrock reference points") {
    const Eigen::VectorXd half = Eigen::VectorXd::Constant(4, 0.5);
    const auto arm = robot_arm(half);
    CHECK(arm.y == doctest::Approx(1.0));
    CHECK(arm.b[0] == doctest::Approx(0.5));
    CHECK(arm.b[1] == doctest::Approx(1.0));
    CHECK(rosenbrock6(Eigen::VectorXd::Constant(6, 0.5)).y == doctest::Approx(225.0));
  }

  TEST_CASE("invalid disk covers pi r^2 of the square") {
    const Problem p = invalid_disk_problem();
    ScrambledSobol s(2, 17);
    const int n = 100000;
    const Eigen::MatrixXd u = s.draw(n);
    int bad = 0;
    for (int i = 0; i < n; ++i) bad += !p.validity(p.input_box.from_unit(u.row(i).transpose()));
    CHECK(static_cast<double>(bad) / n == doctest::Approx(M_PI * 0.04).epsilon(0.02));
    CHECK_FALSE(p.evaluate(p.input_box.from_unit(Eigen::Vector2d(0.3, 0.3))).valid);
  }

  TEST_CASE("synthetic gp is deterministic and bounded") {
    const Problem a = make_problem("synthetic_gp:3:2"), b = make_problem("synthetic_gp:3:2");
    CHECK(a.input_dim() == 10);
    CHECK(a.descriptor_dim() == 2);
    ScrambledSobol s(10, 5);
    const Eigen::MatrixXd u = s.draw(64);
    for (int i = 0; i < 64; ++i) {
      const auto ea = a.evaluate_unit(u.row(i).transpose()), eb = b.evaluate_unit(u.row(i).transpose());
      CHECK(ea.y == eb.y);
      CHECK(ea.b == eb.b);
    }
    CHECK(make_problem("synthetic_gp:3").descriptor_dim() == 1);
  }

  TEST_CASE("problem registry") {
    for (const char* id : {"mishra", "robot_arm", "rosenbrock6", "invalid_disk"}) CHECK(make_problem(id).id == id);
    CHECK_THROWS(make_problem("nope"));
  }

  TEST_CASE("counting wrapper counts every evaluate call") {
    EvaluationCounter c;
    const Problem p = counting(robot_arm_problem(), c);
    for (int i = 0; i < 7; ++i) p.evaluate(Eigen::VectorXd::Constant(4, 0.1 * i));
    CHECK(c.evaluations() == 7);
    CHECK(c.objective() == 7);
  }
}

TEST_SUITE("benchmarks") {
  TEST_CASE("synthetic gp is reproducible from its spec") {
    SyntheticGpSpec spec;
    spec.seed = 5;
    spec.probe_count = 1000;
    const Problem p = synthetic_gp_problem(spec);
    const Problem q = synthetic_gp_problem(spec);
    ScrambledSobol s(10, 8);
    const Eigen::MatrixXd u = s.draw(100);
    for (int i = 0; i < 100; ++i) CHECK(p.objective(u.row(i).transpose()) == q.objective(u.row(i).transpose()));
    CHECK(p.descriptor_box.lower[0] < p.descriptor_box.upper[0]);
  }
}
