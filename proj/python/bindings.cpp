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

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "bopelites/acquisition.hpp"
#include "bopelites/benchmarks.hpp"
#include "bopelites/harness.hpp"
#include "bopelites/io.hpp"
#include "bopelites/seed.hpp"

namespace py = pybind11;
using namespace bope;

namespace {

py::dict artifact_dict(const RunArtifact& a) {
  const long n = static_cast<long>(a.history.size());
  const int d = n ? static_cast<int>(a.history.front().x.size()) : 0;
  int m = 0;
  for (const auto& o : a.history) m = std::max(m, static_cast<int>(o.b.size()));
  Eigen::MatrixXd x(n, d), b = Eigen::MatrixXd::Constant(n, m, std::numeric_limits<double>::quiet_NaN());
  Eigen::VectorXd y(n);
  std::vector<bool> valid(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const auto& o = a.history[static_cast<std::size_t>(i)];
    x.row(i) = o.x.transpose();
    y[i] = o.y;
    if (o.b.size()) b.row(i).head(o.b.size()) = o.b.transpose();
    valid[static_cast<std::size_t>(i)] = o.valid;
  }
  py::dict r;
  r["algorithm"] = a.algorithm;
  r["problem"] = a.problem_id;
  r["mode"] = to_string(a.mode);
  r["resolution"] = a.resolution;
  r["seed"] = a.seed;
  r["qd_score"] = a.qd_score;
  r["filled"] = a.filled;
  r["evaluations"] = a.evaluations;
  r["invalid_evaluations"] = a.invalid_evaluations;
  r["wall_seconds"] = a.wall_seconds;
  r["qd_trace"] = Eigen::VectorXd(
      Eigen::Map<const Eigen::VectorXd>(a.qd_trace.data(), static_cast<Eigen::Index>(a.qd_trace.size())));
  r["x"] = x;
  r["y"] = y;
  r["b"] = b;
  r["valid"] = valid;
  r["artifact"] = to_json(a).dump();
  return r;
}

RegionGrid grid_for(const Problem& p, const std::optional<std::vector<int>>& resolution) {
  return p.grid(resolution ? *resolution : p.default_resolution);
}

py::dict finish(RunArtifact a, const std::vector<TraceRecord>& trace, const Archive& archive,
                const std::optional<std::filesystem::path>& output_dir) {
  if (output_dir) write_run_dir(*output_dir, a, trace, archive);
  return artifact_dict(a);
}

py::dict baseline(const std::string& algorithm, const std::string& problem_id,
                  const std::optional<std::vector<int>>& resolution, long budget, std::uint64_t seed,
                  const std::string& mode, const std::optional<std::filesystem::path>& output_dir,
                  const std::function<BaselineResult(const Problem&, const RegionGrid&)>& run) {
  const Problem p = make_problem(problem_id);
  const RegionGrid g = grid_for(p, resolution);
  BaselineResult r;
  {
    py::gil_scoped_release release;
    r = run(p, g);
  }
  RunArtifact a = make_artifact(algorithm, problem_id, parse_mode(mode), g.partitions(), budget, seed,
                                nlohmann::json::object(), r);
  return finish(std::move(a), r.trace, r.archive, output_dir);
}

py::list summary_rows(const ExperimentReport& rep) {
  py::list rows;
  for (const auto& s : rep.summary) {
    py::dict d;
    d["cell"] = s.cell;
    d["algorithm"] = s.algorithm;
    d["group"] = s.group;
    d["replications"] = s.qd.n;
    d["mean_qd"] = s.qd.mean;
    d["se_qd"] = s.qd.se;
    d["normalized_mean"] = s.normalized.mean;
    d["normalized_se"] = s.normalized.se;
    d["pm_mean"] = s.pm ? py::cast(s.pm->mean) : py::none();
    d["failures"] = s.failures;
    rows.append(d);
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "BOP-Elites quality-diversity optimisation";

  py::class_<Problem>(m, "Problem")
      .def_readonly("id", &Problem::id)
      .def_property_readonly("input_dim", &Problem::input_dim)
      .def_property_readonly("descriptor_dim", &Problem::descriptor_dim)
      .def_property_readonly("input_lower", [](const Problem& p) { return p.input_box.lower; })
      .def_property_readonly("input_upper", [](const Problem& p) { return p.input_box.upper; })
      .def_property_readonly("descriptor_lower", [](const Problem& p) { return p.descriptor_box.lower; })
      .def_property_readonly("descriptor_upper", [](const Problem& p) { return p.descriptor_box.upper; })
      .def_readonly("default_resolution", &Problem::default_resolution)
      .def(
          "evaluate",
          [](const Problem& p, const Eigen::VectorXd& x) {
            const Evaluation e = p.evaluate(x);
            return py::make_tuple(e.y, e.b, e.valid);
          },
          py::arg("x"), "Returns (objective, descriptors, valid) at a natural-coordinate point.")
      .def("grid", [](const Problem& p, const std::optional<std::vector<int>>& r) { return grid_for(p, r); },
           py::arg("resolution") = py::none());

  m.def("make_problem", &make_problem, py::arg("id"),
        "mishra, robot_arm, rosenbrock6, invalid_disk, synthetic_gp:<seed>[:<descriptors>]");

  py::class_<RegionGrid>(m, "RegionGrid")
      .def(py::init<Eigen::VectorXd, Eigen::VectorXd, std::vector<int>>(), py::arg("lower"), py::arg("upper"),
           py::arg("partitions"))
      .def_property_readonly("region_count", &RegionGrid::region_count)
      .def_property_readonly("partitions", &RegionGrid::partitions)
      .def("flat_index", &RegionGrid::flat_index, py::arg("b"))
      .def("unflatten", &RegionGrid::unflatten, py::arg("flat"))
      .def("region_box", &RegionGrid::region_box, py::arg("flat"));

  py::class_<Archive>(m, "Archive")
      .def(py::init<RegionGrid>(), py::arg("grid"))
      .def(
          "offer",
          [](Archive& a, const Eigen::VectorXd& x, double y, const Eigen::VectorXd& b, bool valid) {
            return a.offer(Observation{x, y, b, valid, static_cast<long>(a.history().size())});
          },
          py::arg("x"), py::arg("y"), py::arg("b"), py::arg("valid") = true)
      .def_property_readonly("qd_score", &Archive::qd_score)
      .def_property_readonly("filled_count", &Archive::filled_count)
      .def("elite_value", &Archive::elite_value, py::arg("region"))
      .def("elite_x", [](const Archive& a, std::size_t r) -> std::optional<Eigen::VectorXd> {
        if (const auto* e = a.elite(r)) return e->x;
        return std::nullopt;
      });

  py::class_<GpModel>(m, "GpModel")
      .def_static(
          "fit",
          [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int restarts, std::uint64_t seed) {
            GpFitOptions o;
            o.restarts = restarts;
            o.seed = seed;
            py::gil_scoped_release release;
            return GpModel::fit(x, y, o);
          },
          py::arg("x"), py::arg("y"), py::arg("restarts") = 8, py::arg("seed") = 0,
          "Fits a Matern-5/2 ARD model to unit-box inputs.")
      .def_static(
          "condition",
          [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& lengthscales,
             double signal_variance) {
            return GpModel::condition(x, y, KernelParams{lengthscales, signal_variance});
          },
          py::arg("x"), py::arg("y"), py::arg("lengthscales"), py::arg("signal_variance") = 1.0)
      .def(
          "predict",
          [](const GpModel& g, const Eigen::MatrixXd& points) {
            Eigen::VectorXd mean, sd;
            g.predict_batch(points, mean, sd);
            return py::make_tuple(mean, sd);
          },
          py::arg("points"), "Posterior mean and standard deviation per row.")
      .def_property_readonly("lengthscales", [](const GpModel& g) { return g.params().lengthscales; })
      .def_property_readonly("signal_variance", [](const GpModel& g) { return g.params().signal_variance; })
      .def_property_readonly("log_marginal_likelihood", &GpModel::log_marginal_likelihood);

  m.def(
      "ei_region",
      [](double mean, double sd, std::optional<double> elite) { return ei_region(Posterior{mean, sd}, elite); },
      py::arg("mean"), py::arg("std"), py::arg("elite") = py::none());
  m.def(
      "region_probability",
      [](const std::vector<double>& means, const std::vector<double>& sds, const RegionGrid& g, std::size_t r) {
        if (means.size() != sds.size()) throw py::value_error("means and stds differ in length");
        std::vector<Posterior> d;
        for (std::size_t i = 0; i < means.size(); ++i) d.push_back({means[i], sds[i]});
        return region_probability(d, g, r);
      },
      py::arg("means"), py::arg("stds"), py::arg("grid"), py::arg("region"));
  m.def("cutoff_omega", &cutoff_omega, py::arg("alpha"), py::arg("beta"), py::arg("t"), py::arg("region_count"),
        py::arg("input_dim"));

  m.def(
      "run_bop_elites",
      [](const std::string& problem_id, const std::optional<std::vector<int>>& resolution, long budget,
         const std::string& mode, std::uint64_t seed, long initial_design, int presample_count, int restart_count,
         int gp_restarts, bool use_feasibility, bool initial_upscaling,
         const std::optional<std::filesystem::path>& output_dir) {
        RunConfig c;
        c.problem_id = problem_id;
        if (resolution) c.resolution = *resolution;
        c.budget = budget;
        c.mode = parse_mode(mode);
        c.seed = seed;
        c.initial_design = initial_design;
        c.optimizer.presample_count = presample_count;
        c.optimizer.restart_count = restart_count;
        c.gp.restarts = gp_restarts;
        c.use_feasibility = use_feasibility;
        c.initial_upscaling = initial_upscaling;
        const Problem p = make_problem(problem_id);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_bop_elites(p, c);
        }
        return finish(make_artifact("bop_elites", r), r.trace, r.archive, output_dir);
      },
      py::arg("problem"), py::arg("resolution") = py::none(), py::arg("budget") = 1000,
      py::arg("mode") = "black_box", py::arg("seed") = 0, py::arg("initial_design") = 0,
      py::arg("presample_count") = 1024, py::arg("restart_count") = 10, py::arg("gp_restarts") = 8,
      py::arg("use_feasibility") = true, py::arg("initial_upscaling") = false, py::arg("output_dir") = py::none());

  m.def(
      "map_elites",
      [](const std::string& id, const std::optional<std::vector<int>>& res, long budget, std::uint64_t seed,
         double sigma, int children, const std::optional<std::filesystem::path>& out) {
        MapElitesConfig c;
        c.mutation_sigma = sigma;
        c.children_per_generation = children;
        return baseline("map_elites", id, res, budget, seed, "white_box", out,
                        [&](const Problem& p, const RegionGrid& g) { return map_elites_run(p, g, budget, c, seed); });
      },
      py::arg("problem"), py::arg("resolution") = py::none(), py::arg("budget") = 1000, py::arg("seed") = 0,
      py::arg("mutation_sigma") = 0.1, py::arg("children_per_generation") = 50, py::arg("output_dir") = py::none());

  m.def(
      "sobol",
      [](const std::string& id, const std::optional<std::vector<int>>& res, long budget, std::uint64_t seed,
         const std::optional<std::filesystem::path>& out) {
        return baseline("sobol", id, res, budget, seed, "white_box", out,
                        [&](const Problem& p, const RegionGrid& g) { return sobol_run(p, g, budget, seed); });
      },
      py::arg("problem"), py::arg("resolution") = py::none(), py::arg("budget") = 1000, py::arg("seed") = 0,
      py::arg("output_dir") = py::none());

  for (const char* name : {"sail", "sphen"}) {
    const bool sphen = std::string(name) == "sphen";
    m.def(
        name,
        [sphen](const std::string& id, const std::optional<std::vector<int>>& res, long budget, std::uint64_t seed,
                double beta_ucb, int inner_generations, int gp_restarts,
                const std::optional<std::filesystem::path>& out) {
          SailConfig c;
          c.beta_ucb = beta_ucb;
          c.inner_generations = inner_generations;
          c.gp.restarts = gp_restarts;
          return baseline(sphen ? "sphen" : "sail", id, res, budget, seed, sphen ? "black_box" : "white_box", out,
                          [&](const Problem& p, const RegionGrid& g) {
                            return sphen ? sphen_run(p, g, budget, c, seed) : sail_run(p, g, budget, c, seed);
                          });
        },
        py::arg("problem"), py::arg("resolution") = py::none(), py::arg("budget") = 1000, py::arg("seed") = 0,
        py::arg("beta_ucb") = 3.7, py::arg("inner_generations") = 10, py::arg("gp_restarts") = 8,
        py::arg("output_dir") = py::none());
  }

  m.def(
      "upscale",
      [](const std::string& artifact_json, const std::vector<int>& resolution, int generations, bool score) {
        const RunArtifact a = run_artifact_from_json(nlohmann::json::parse(artifact_json));
        const Problem p = make_problem(a.problem_id);
        PmConfig cfg;
        cfg.generations = generations;
        cfg.seed = derive_seed(a.seed, 31);
        cfg.low_confidence_threshold = a.omega_final;
        PredictionMap pm;
        std::optional<double> total;
        {
          py::gil_scoped_release release;
          const Surrogates models = rebuild_models(a, p);
          pm = upscale(models, a.mode, [&](const Eigen::MatrixXd& q) { return p.descriptors_unit(q); }, a.history,
                       p.input_box, p.grid(resolution), cfg);
          if (score) total = score_pm(p, pm).total;
        }
        py::dict r;
        r["filled"] = pm.filled();
        r["predicted_total"] = pm.predicted_total();
        r["score"] = total ? py::cast(*total) : py::none();
        r["pm"] = nlohmann::json{{"problem", a.problem_id}, {"pm", to_json(pm)}}.dump();
        return r;
      },
      py::arg("artifact"), py::arg("resolution"), py::arg("generations") = 200, py::arg("score") = true,
      "Prediction map on a finer grid from a run's artifact json.");

  m.def(
      "score_pm",
      [](const std::string& pm_json) {
        const auto j = nlohmann::json::parse(pm_json);
        const Problem p = make_problem(j.at("problem").get<std::string>());
        return score_pm(p, prediction_map_from_json(j.at("pm"))).total;
      },
      py::arg("pm"), "True QD score of a prediction map json.");

  m.def(
      "run_experiment",
      [](const std::filesystem::path& config, const std::vector<std::string>& overrides) {
        const ExperimentSpec spec = load_experiment(config, overrides);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(spec);
        }
        py::dict d;
        d["summary"] = summary_rows(r.report);
        d["failures"] = r.failures;
        d["output_dir"] = resolve_output(spec.output_dir);
        return d;
      },
      py::arg("config"), py::arg("overrides") = std::vector<std::string>{});

  m.def(
      "report_directory",
      [](const std::filesystem::path& dir, bool normalize, double confidence) {
        return summary_rows(report_directory(dir, normalize, confidence));
      },
      py::arg("dir"), py::arg("normalize") = true, py::arg("confidence") = 0.99);
}
