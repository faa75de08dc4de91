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

#include <random>

#include <doctest.h>

#include "bopelites/archive.hpp"
#include "bopelites/benchmarks.hpp"

using namespace bope;

namespace {

RegionGrid unit_grid(int n) { return RegionGrid(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), {n, n}); }

Observation obs(double y, double b0, double b1, bool valid = true) {
  Observation o;
  o.x = Eigen::Vector2d(b0, b1);
  o.y = y;
  o.b = Eigen::Vector2d(b0, b1);
  o.valid = valid;
  return o;
}

}  // namespace

TEST_SUITE("archive") {
  TEST_CASE("boundaries go up, the top edge stays in the last cell") {
    const RegionGrid g = unit_grid(4);
    CHECK(g.partition_of(0, 0.25) == 1);
    CHECK(g.partition_of(0, 0.2499) == 0);
    CHECK(g.partition_of(0, 1.0) == 3);
    CHECK(g.partition_of(0, 1.0001) == -1);
    CHECK(g.partition_of(0, -1e-9) == -1);
    CHECK(g.region_count() == 16);
    CHECK(*g.flat_index(Eigen::Vector2d(0.3, 0.8)) == 1 * 4 + 3);
    CHECK(g.unflatten(7) == std::vector<int>{1, 3});
    CHECK(g.flatten({1, 3}) == 7);
  }

  TEST_CASE("elite replaced only on strict improvement") {
    Archive a(unit_grid(2));
    CHECK(a.offer(obs(1.0, 0.1, 0.1)));
    CHECK_FALSE(a.offer(obs(1.0, 0.2, 0.2)));
    CHECK(a.elite(0)->b[0] == doctest::Approx(0.1));
    CHECK(a.offer(obs(2.0, 0.2, 0.2)));
    CHECK_FALSE(a.offer(obs(9.0, 0.2, 0.2, false)));
    CHECK_FALSE(a.offer(obs(9.0, 1.5, 0.2)));
    CHECK(a.offer(obs(-3.0, 0.9, 0.9)));
    CHECK(a.qd_score() == doctest::Approx(-1.0));
    CHECK(a.filled_count() == 2);
    CHECK(a.history().size() == 6);
  }

  TEST_CASE("rebinning replays history") {
    Archive a(unit_grid(2));
    a.offer(obs(1.0, 0.1, 0.1));
    a.offer(obs(2.0, 0.3, 0.3));
    const Archive fine = a.rebinned(unit_grid(4));
    CHECK(fine.filled_count() == 2);
    CHECK(fine.qd_score() == doctest::Approx(3.0));
    CHECK(a.qd_score() == doctest::Approx(2.0));
  }

  TEST_CASE("predicted score counts landed proposals only") {
    const Problem p = robot_arm_problem();
    const RegionGrid g = p.grid({2, 2});
    std::vector<std::optional<Eigen::VectorXd>> props(g.region_count());
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(4, 0.5);
    const auto b = p.descriptors(x);
    const std::size_t home = *g.flat_index(b);
    props[home] = x;
    props[(home + 1) % 4] = x;
    const auto s = predicted_qd_score(p, g, props);
    CHECK(s.landed[home]);
    CHECK_FALSE(s.landed[(home + 1) % 4]);
    CHECK(s.total == doctest::Approx(p.objective(x)));
  }
}
