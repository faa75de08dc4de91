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

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/algorithm/string.hpp>

#include "bopelites/benchmarks.hpp"
#include "bopelites/harness.hpp"
#include "bopelites/io.hpp"
#include "bopelites/seed.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path run_json_path(const fs::path& p) { return fs::is_directory(p) ? p / "run.json" : p; }

std::vector<int> parse_resolution(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(",x"), boost::token_compress_on);
  std::vector<int> out;
  for (const auto& p : parts) out.push_back(std::stoi(p));
  return out;
}

void save_pm(const fs::path& out, const std::string& problem_id, const bope::PredictionMap& pm,
             const bope::Problem& problem, bool score) {
  json j{{"problem", problem_id}, {"filled", pm.filled()}, {"predicted_total", pm.predicted_total()},
         {"pm", bope::to_json(pm)}};
  fs::path csv = out;
  csv.replace_extension(".csv");
  if (score) {
    const auto scored = bope::score_pm(problem, pm);
    j["score"] = scored.total;
    bope::write_pm_csv(csv, pm, problem.input_box, &scored, &problem);
    std::cout << "true QD score " << scored.total << '\n';
  } else {
    bope::write_pm_csv(csv, pm, problem.input_box);
  }
  bope::write_json(out, j);
  std::cout << "filled " << pm.filled() << " of " << pm.grid.region_count() << " regions, predicted "
            << pm.predicted_total() << "\nwrote " << out.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BOP-Elites quality-diversity optimisation toolkit"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Execute an experiment config");
  std::string config_file;
  std::vector<std::string> overrides;
  int jobs = 0;
  bool no_reuse = false;
  run->add_option("config", config_file, "INFO-format experiment file")->required()->check(CLI::ExistingFile);
  run->add_option("--set", overrides, "Override a config key, path=value");
  run->add_option("-j,--jobs", jobs, "Worker threads");
  run->add_flag("--no-reuse", no_reuse, "Ignore cached runs");

  auto* pm = app.add_subcommand("pm", "Build a prediction map from a finished run");
  auto* up = app.add_subcommand("upscale", "Prediction map for a finer grid from a finished run");
  std::string run_path, out_path, resolution;
  int generations = 0;
  bool score = false;
  for (auto* sub : {pm, up}) {
    sub->add_option("run", run_path, "Run directory or run.json")->required();
    sub->add_option("-o,--out", out_path, "Output json (csv written alongside)");
    sub->add_option("--generations", generations, "Inner MAP-Elites generations");
    sub->add_flag("--score", score, "Evaluate the proposals on the true problem");
  }
  pm->add_option("--resolution", resolution, "Grid, e.g. 10,10 (default: the run's grid)");
  up->add_option("-r,--resolution", resolution, "Fine grid, e.g. 50,50")->required();

  auto* score_cmd = app.add_subcommand("score-pm", "True QD score of a saved prediction map");
  std::string pm_file, problem_id;
  score_cmd->add_option("pm", pm_file, "Prediction map json")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--problem", problem_id, "Problem id (default: from the file)");

  auto* report = app.add_subcommand("report", "Aggregate run artifacts under a directory");
  std::string report_dir;
  bool raw = false;
  double confidence = 0.99;
  report->add_option("dir", report_dir)->required()->check(CLI::ExistingDirectory);
  report->add_flag("--raw", raw, "Skip per-seed normalisation");
  report->add_option("--confidence", confidence, "t-test confidence level");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto spec = bope::load_experiment(config_file, overrides);
      if (jobs > 0) spec.jobs = jobs;
      if (no_reuse) spec.reuse = false;
      const auto result = bope::run_experiment(spec, &std::cout);
      std::cout << "wrote " << bope::resolve_output(spec.output_dir).string() << '\n';
      if (result.failures > 0) {
        std::cerr << result.failures << " run(s) failed\n";
        return 1;
      }
      return 0;
    }
    if (pm->parsed() || up->parsed()) {
      const fs::path src = run_json_path(run_path);
      const auto artifact = bope::run_artifact_from_json(bope::read_json(src));
      const auto problem = bope::make_problem(artifact.problem_id);
      const auto grid = problem.grid(resolution.empty() ? artifact.resolution : parse_resolution(resolution));
      const auto models = bope::rebuild_models(artifact, problem);
      bope::PmConfig cfg;
      if (generations > 0) cfg.generations = generations;
      cfg.seed = bope::derive_seed(artifact.seed, 31);
      cfg.low_confidence_threshold = artifact.omega_final;
      bope::PredictionMap map;
      if (up->parsed()) {
        map = bope::upscale(models, artifact.mode,
                            [&](const Eigen::MatrixXd& p) { return problem.descriptors_unit(p); }, artifact.history,
                            problem.input_box, grid, cfg);
      } else {
        map = bope::build_pm_for_run(problem, models, artifact.mode, artifact.history, grid, cfg);
      }
      fs::path out = out_path;
      if (out.empty()) out = src.parent_path() / (up->parsed() ? "upscaled_pm.json" : "pm.json");
      save_pm(out, artifact.problem_id, map, problem, score);
      return 0;
    }
    if (score_cmd->parsed()) {
      const json j = bope::read_json(pm_file);
      const std::string id = problem_id.empty() ? j.at("problem").get<std::string>() : problem_id;
      const auto map = bope::prediction_map_from_json(j.contains("pm") ? j.at("pm") : j);
      const auto problem = bope::make_problem(id);
      const auto scored = bope::score_pm(problem, map);
      std::cout << "true QD score " << scored.total << " from " << map.filled() << " proposals\n";
      return 0;
    }
    if (report->parsed()) {
      const auto rep = bope::report_directory(report_dir, !raw, confidence);
      bope::write_report(report_dir, rep);
      for (const auto& r : rep.summary)
        std::cout << r.cell << "  n=" << r.qd.n << "  qd " << r.qd.mean << " +- " << r.qd.se << '\n';
      std::cout << "wrote summary.csv, tests.csv, normalized.csv, convergence.csv\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
