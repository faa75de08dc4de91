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

#include <doctest.h>

#include "bopelites/pattern_search.hpp"

using namespace bope;

TEST_SUITE("pattern_search") {
  TEST_CASE("finds the peak of a quadratic") {
    const Eigen::Vector3d c(0.3, 0.71, 0.5);
    auto f = [&](const Eigen::VectorXd& x) { return -(x - c).squaredNorm(); };
    const auto r = pattern_search(f, Eigen::VectorXd::Constant(3, 0.9), PatternSearchConfig{0.1, 0.5, 100, 1500, 1e-7});
    CHECK((r.x - c).norm() < 1e-5);
    CHECK(r.value <= 0.0);
    CHECK(r.final_step < 1e-6);
  }

  TEST_CASE("stays inside the box") {
    auto f = [](const Eigen::VectorXd& x) { return x.sum(); };
    Eigen::VectorXd lo = Eigen::Vector2d(-1, -1), hi = Eigen::Vector2d(0.25, 0.5);
    const auto r = pattern_search(f, Eigen::Vector2d(0, 0), PatternSearchConfig{}, lo, hi);
    CHECK(r.x[0] == doctest::Approx(0.25));
    CHECK(r.x[1] == doctest::Approx(0.5));
  }

  TEST_CASE("batch equals sequential") {
    auto point = [](const Eigen::VectorXd& x) { return std::sin(7 * x[0]) * std::cos(5 * x[1]); };
    BatchObjective batch = [&](const Eigen::MatrixXd& p) {
      Eigen::VectorXd v(p.rows());
      for (Eigen::Index i = 0; i < p.rows(); ++i) v[i] = point(p.row(i).transpose());
      return v;
    };
    Eigen::MatrixXd starts(3, 2);
    starts << 0.1, 0.1, 0.5, 0.9, 0.8, 0.3;
    const PatternSearchConfig cfg;
    const auto rs = pattern_search_batch(batch, starts, cfg);
    REQUIRE(rs.size() == 3);
    for (int i = 0; i < 3; ++i) {
      const auto one = pattern_search(point, starts.row(i).transpose(), cfg);
      CHECK(rs[i].x == one.x);
      CHECK(rs[i].value == one.value);
      CHECK(rs[i].evaluations == one.evaluations);
    }
  }

  TEST_CASE("nan is never accepted") {
    auto f = [](const Eigen::VectorXd& x) { return x[0] > 0.55 ? std::nan("") : x[0]; };
    const auto r = pattern_search(f, Eigen::VectorXd::Constant(1, 0.5), PatternSearchConfig{});
    CHECK(r.x[0] <= 0.55);
    CHECK(std::isfinite(r.value));
  }

  TEST_CASE("config validation") {
    PatternSearchConfig c;
    c.contraction_factor = 1.5;
    CHECK_THROWS(c.validate());
  }
}
