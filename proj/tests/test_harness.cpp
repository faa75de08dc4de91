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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include <boost/property_tree/info_parser.hpp>

#include "bopelites/harness.hpp"

using namespace bope;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentSpec parse(const std::string& text) {
  std::istringstream in(text);
  boost::property_tree::ptree t;
  boost::property_tree::read_info(in, t);
  return parse_experiment(t);
}

const char* kTwoByThree = R"(
seeds 0,1,2
defaults
{
    problem robot_arm
    resolution 4,4
    budget 40
}
cells
{
    me { algorithm map_elites }
    so { algorithm sobol }
}
)";

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("mean and standard error") {
    const std::vector<double> v{1.0, 3.0};
    const MeanSe m = mean_se(v);
    CHECK(m.mean == 2.0);
    CHECK(m.se == doctest::Approx(1.0));
    CHECK(mean_se(std::vector<double>{5.0}).se == 0.0);
  }

  TEST_CASE("convergence rows") {
    const auto rows = emit_convergence("c", {{1.0}, {3.0}});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].qd.mean == 2.0);
    CHECK(rows[0].qd.se == doctest::Approx(1.0));
    const auto single = emit_convergence("c", {{1.0, 2.0, 4.0}});
    CHECK(single[2].qd.mean == 4.0);
    CHECK(single[2].qd.se == 0.0);
  }

  TEST_CASE("welch test") {
    const std::vector<double> a{1.0, 2.0, 3.0, 4.0}, b{1.0, 2.0, 3.0, 4.0}, c{11.0, 12.0, 13.0, 14.5};
    CHECK_FALSE(welch_t_test(a, b, 0.99).significant);
    CHECK(welch_t_test(a, b, 0.99).p_value == doctest::Approx(1.0));
    const auto r = welch_t_test(c, a, 0.99);
    CHECK(r.significant);
    CHECK(r.t > 0.0);
    // Equal variances and sizes: df = 2 (n - 1)
    CHECK(welch_t_test(a, std::vector<double>{2.0, 3.0, 4.0, 5.0}, 0.95).df == doctest::Approx(6.0));
  }

  TEST_CASE("config parsing is strict") {
    const ExperimentSpec s = parse(kTwoByThree);
    CHECK(s.seeds.size() == 3);
    REQUIRE(s.cells.size() == 2);
    CHECK(s.cells[0].budget == 40);
    CHECK(s.cells[1].algorithm == "sobol");
    CHECK(s.cells[0].group_key() == "robot_arm/4x4");
    CHECK_THROWS(parse("seeds 0\ncells { a { colour red } }"));
    CHECK_THROWS(parse("seeds 0\nwhatever 1\ncells { a { } }"));
    CHECK_THROWS(parse("seeds 0\ncells { a { algorithm cmaes } }"));
    CHECK_THROWS(parse("seeds 0"));
  }

  TEST_CASE("experiment bookkeeping, normalisation and reproducibility") {
    const auto root = std::filesystem::temp_directory_path() / "bope_harness_test";
    std::filesystem::remove_all(root);
    ExperimentSpec s = parse(kTwoByThree);
    s.output_dir = root / "a";
    s.reuse = false;
    const ExperimentResult r = run_experiment(s);
    CHECK(r.runs.size() == 6);
    CHECK(r.failures == 0);
    REQUIRE(r.report.summary.size() == 2);
    for (const auto& [key, v] : r.report.normalized) {
      CHECK(v > 0.0);
      CHECK(v <= 1.0);
    }
    REQUIRE(r.report.tests.size() == 1);

    s.output_dir = root / "b";
    s.jobs = 2;
    run_experiment(s);
    CHECK(slurp(root / "a" / "summary.csv") == slurp(root / "b" / "summary.csv"));
    CHECK(slurp(root / "a" / "convergence.csv") == slurp(root / "b" / "convergence.csv"));

    const ExperimentReport back = report_directory(root / "a" / "runs", true, 0.99);
    REQUIRE(back.summary.size() == 2);
    for (const auto& row : r.report.summary) {
      const auto it = std::find_if(back.summary.begin(), back.summary.end(),
                                   [&](const SummaryRow& b) { return b.cell == row.cell; });
      REQUIRE(it != back.summary.end());
      CHECK(it->qd.mean == doctest::Approx(row.qd.mean).epsilon(1e-12));
    }
    std::filesystem::remove_all(root);
  }

  TEST_CASE("failed runs are recorded and excluded") {
    const auto root = std::filesystem::temp_directory_path() / "bope_harness_fail";
    std::filesystem::remove_all(root);
    ExperimentSpec s = parse("seeds 0,1\ncells { ok { algorithm sobol\nproblem robot_arm\nbudget 10 }\n"
                             "bad { algorithm sobol\nproblem no_such_problem } }");
    s.output_dir = root;
    const ExperimentResult r = run_experiment(s);
    CHECK(r.failures == 2);
    CHECK(r.report.summary[1].failures == 2);
    CHECK(r.report.summary[1].qd.n == 0);
    CHECK(r.report.summary[0].qd.n == 2);
    CHECK(slurp(root / "failures.csv").find("bad,0") != std::string::npos);
    std::filesystem::remove_all(root);
  }
}
