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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "bopelites/baselines.hpp"
#include "bopelites/bop_elites.hpp"
#include "bopelites/io.hpp"
#include "bopelites/prediction.hpp"

namespace bope {

/// One (algorithm, problem, resolution, budget) combination.
struct CellSpec {
  std::string name;
  std::string algorithm = "bop_elites";  // bop_elites | map_elites | sobol | sail | sphen
  std::string problem = "mishra";
  DescriptorMode mode = DescriptorMode::WhiteBox;
  std::vector<int> resolution;  // empty: problem default
  long budget = 1000;
  // Cells with the same group are normalised and tested together. Empty:
  // "<problem>/<resolution>".
  std::string group;
  RunConfig bop;
  MapElitesConfig map_elites;
  SailConfig sail;
  bool build_pm = false;
  PmConfig pm;

  std::string group_key() const;
  /// Canonical settings echo; a cached run is reused only if it matches.
  nlohmann::json fingerprint() const;
};

struct ExperimentSpec {
  std::string name = "experiment";
  std::filesystem::path output_dir = "out";
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  bool normalize = true;
  double confidence = 0.99;
  int jobs = 1;
  bool reuse = true;
  std::vector<CellSpec> cells;
};

/// Parses the nested key-value config. Unknown keys are errors.
ExperimentSpec parse_experiment(const boost::property_tree::ptree& tree);

/// Reads an INFO-format file and applies `path=value` overrides first.
ExperimentSpec load_experiment(const std::filesystem::path& file, const std::vector<std::string>& overrides = {});

/// Relative paths resolve against $BOPE_OUTPUT_ROOT when it is set.
std::filesystem::path resolve_output(const std::filesystem::path& dir);

struct RunOutcome {
  std::string cell;
  std::uint64_t seed = 0;
  bool ok = false;
  bool reused = false;
  std::string error;
  std::filesystem::path dir;
  RunArtifact artifact;
  std::optional<double> pm_score;
};

/// Executes one replication into `dir`, or loads it when `reuse` is set and
/// a matching run.json exists.
RunOutcome run_cell(const CellSpec& cell, std::uint64_t seed, const std::filesystem::path& dir, bool reuse);

/// Prediction map on `grid` from fitted models, seeded with the valid
/// inputs of `history`.
PredictionMap build_pm_for_run(const Problem& problem, const Surrogates& models, DescriptorMode mode,
                               const std::vector<Observation>& history, const RegionGrid& grid,
                               const PmConfig& config);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

/// Standard error is the sample standard deviation over sqrt(n); 0 for n < 2.
MeanSe mean_se(std::span<const double> values);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  bool significant = false;
};

/// Two-sided Welch t-test at the given confidence level.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b, double confidence);

struct SummaryRow {
  std::string cell;
  std::string algorithm;
  std::string group;
  MeanSe qd;
  MeanSe normalized;
  std::optional<MeanSe> pm;
  std::size_t failures = 0;
};

struct TestRow {
  std::string group;
  std::string best;
  std::string runner_up;
  WelchResult result;
};

struct ConvergenceRow {
  std::string cell;
  long evaluation = 0;
  MeanSe qd;
};

struct ExperimentReport {
  std::vector<SummaryRow> summary;
  std::vector<TestRow> tests;
  std::vector<ConvergenceRow> convergence;
  // Per (cell, seed) normalised score.
  std::map<std::pair<std::string, std::uint64_t>, double> normalized;
};

/// Aggregates outcomes of successful runs. `cells` fixes the row order.
ExperimentReport aggregate(const std::vector<CellSpec>& cells, const std::vector<RunOutcome>& outcomes,
                           bool normalize, double confidence);

/// Convergence rows for a set of QD traces: mean and standard error per
/// evaluation index over the traces long enough to reach it.
std::vector<ConvergenceRow> emit_convergence(const std::string& cell,
                                             const std::vector<std::vector<double>>& traces);

void write_report(const std::filesystem::path& dir, const ExperimentReport& report);

struct ExperimentResult {
  std::vector<RunOutcome> runs;
  ExperimentReport report;
  std::size_t failures = 0;
};

ExperimentResult run_experiment(const ExperimentSpec& spec, std::ostream* log = nullptr);

/// Loads every run.json under `dir` and aggregates by the cell names stored
/// in the artifacts.
ExperimentReport report_directory(const std::filesystem::path& dir, bool normalize, double confidence);

}  // namespace bope
