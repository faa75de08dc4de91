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

#include "bopelites/baselines.hpp"
#include "bopelites/benchmarks.hpp"

using namespace bope;

TEST_SUITE("baselines") {
  TEST_CASE("map-elites and sobol spend exactly the budget") {
    for (long budget : {30L, 50L, 123L}) {
      EvaluationCounter c1, c2;
      const Problem p1 = counting(robot_arm_problem(), c1), p2 = counting(robot_arm_problem(), c2);
      const auto me = map_elites_run(p1, p1.grid({5, 5}), budget, MapElitesConfig{}, 1);
      const auto so = sobol_run(p2, p2.grid({5, 5}), budget, 1);
      CHECK(c1.evaluations() == budget);
      CHECK(c2.evaluations() == budget);
      CHECK(me.trace.size() == static_cast<std::size_t>(budget));
      CHECK(so.evaluations == budget);
    }
  }

  TEST_CASE("map-elites is seed deterministic") {
    const Problem p = mishra_problem();
    const auto a = map_elites_run(p, p.grid({10, 10}), 200, MapElitesConfig{}, 4);
    const auto b = map_elites_run(p, p.grid({10, 10}), 200, MapElitesConfig{}, 4);
    CHECK(a.archive.qd_score() == b.archive.qd_score());
  }

  TEST_CASE("illuminated elites sit in their own regions") {
    const RegionGrid g(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), {4, 4});
    auto fit = [](const Eigen::MatrixXd& x) -> Eigen::VectorXd { return -(x.array() - 0.5).square().rowwise().sum(); };
    auto desc = [](const Eigen::MatrixXd& x) -> Eigen::MatrixXd { return x; };
    std::mt19937_64 rng(2);
    const SurrogateMap m = illuminate(fit, desc, g, Eigen::MatrixXd::Constant(1, 2, 0.5), 40, MapElitesConfig{}, rng);
    CHECK(m.filled() >= 14);
    for (std::size_t r = 0; r < g.region_count(); ++r) {
      if (!m.x[r]) continue;
      CHECK(*g.flat_index(*m.x[r]) == r);
      CHECK(m.fitness[r] == doctest::Approx(fit(m.x[r]->transpose())[0]));
    }
  }

  TEST_CASE("sail and sphen respect the budget") {
    SailConfig cfg;
    cfg.gp.restarts = 2;
    cfg.inner_generations = 3;
    for (int which = 0; which < 2; ++which) {
      EvaluationCounter c;
      const Problem p = counting(mishra_problem(), c);
      const auto r = which == 0 ? sail_run(p, p.grid({5, 5}), 30, cfg, 0) : sphen_run(p, p.grid({5, 5}), 30, cfg, 0);
      CHECK(c.evaluations() == 30);
      CHECK(r.trace.size() == 30);
      CHECK(r.models.objective.has_value());
    }
  }
}
