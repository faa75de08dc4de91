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

#include "bopelites/benchmarks.hpp"
#include "bopelites/bop_elites.hpp"

using namespace bope;

namespace {

RunConfig small(const std::string& id, DescriptorMode mode, long budget) {
  RunConfig c;
  c.problem_id = id;
  c.mode = mode;
  c.budget = budget;
  c.resolution = {5, 5};
  c.optimizer.presample_count = 256;
  c.optimizer.restart_count = 4;
  c.gp.restarts = 2;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_SUITE("bop_elites") {
  TEST_CASE("white-box run spends exactly the budget") {
    EvaluationCounter counter;
    const Problem p = counting(robot_arm_problem(), counter);
    const RunResult r = run_bop_elites(p, small("robot_arm", DescriptorMode::WhiteBox, 50));
    CHECK(r.evaluations == 50);
    CHECK(counter.evaluations() == 50);
    REQUIRE(r.trace.size() == 50);
    CHECK(r.archive.history().size() == 50);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].qd_score >= r.trace[i - 1].qd_score);
    CHECK(r.trace.back().qd_score == doctest::Approx(r.archive.qd_score()));
    CHECK(std::isnan(r.trace[0].acquisition));
    CHECK_FALSE(std::isnan(r.trace[45].acquisition));
    CHECK(r.models.objective.has_value());
  }

  TEST_CASE("seed-identical runs give identical traces") {
    const Problem p = mishra_problem();
    const RunConfig c = small("mishra", DescriptorMode::BlackBox, 28);
    const RunResult a = run_bop_elites(p, c), b = run_bop_elites(p, c);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
      CHECK(a.trace[i].x == b.trace[i].x);
      CHECK(a.trace[i].qd_score == b.trace[i].qd_score);
    }
    CHECK(a.models.descriptors.size() == 2);
  }

  TEST_CASE("initial design is shared and seeded") {
    const Eigen::MatrixXd a = initial_design(3, 30, 1), b = initial_design(3, 30, 1), c = initial_design(3, 30, 2);
    CHECK(a == b);
    CHECK(a != c);
  }

  TEST_CASE("coarse start ends on the target grid") {
    RunConfig c = small("mishra", DescriptorMode::WhiteBox, 40);
    c.resolution = {10, 10};
    c.initial_upscaling = true;
    c.coarse_partitions = 3;
    const RunResult r = run_bop_elites(mishra_problem(), c);
    CHECK(r.archive.grid().partitions() == std::vector<int>{10, 10});
    CHECK(r.archive.history().size() == 40);
  }

  TEST_CASE("config validation") {
    RunConfig c;
    c.budget = 5;
    CHECK_THROWS(c.validate(2));
    c.budget = 100;
    CHECK_NOTHROW(c.validate(2));
    CHECK(c.initial_design_size(4) == 40);
  }
}
