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

#include "bopelites/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>


namespace bope {

using nlohmann::json;

namespace {

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = j[i].is_null() ? std::numeric_limits<double>::quiet_NaN() : j[i].get<double>();
  return v;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double num(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

json model_json(const ModelRecord& m) {
  return json{{"lengthscales", vec(m.params.lengthscales)},
              {"signal_variance", m.params.signal_variance},
              {"jitter", m.jitter}};
}

ModelRecord model_from(const json& j) {
  ModelRecord m;
  m.params.lengthscales = vec(j.at("lengthscales"));
  m.params.signal_variance = j.at("signal_variance").get<double>();
  m.jitter = j.at("jitter").get<double>();
  return m;
}

ModelRecord record(const GpModel& m) { return ModelRecord{m.params(), m.jitter()}; }

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void fill_models(RunArtifact& a, const Surrogates& models) {
  if (models.objective) a.objective_model = record(*models.objective);
  for (const auto& d : models.descriptors) a.descriptor_models.push_back(record(d));
}

void fill_trace(RunArtifact& a, const std::vector<TraceRecord>& trace) {
  for (const auto& t : trace) {
    a.qd_trace.push_back(t.qd_score);
    if (!t.valid) ++a.invalid_evaluations;
  }
}

}  // namespace

std::string to_string(DescriptorMode mode) { return mode == DescriptorMode::WhiteBox ? "white_box" : "black_box"; }

DescriptorMode parse_mode(const std::string& text) {
  if (text == "white_box" || text == "white") return DescriptorMode::WhiteBox;
  if (text == "black_box" || text == "black") return DescriptorMode::BlackBox;
  throw std::invalid_argument("unknown descriptor mode '" + text + "'");
}

json to_json(const RunConfig& c) {
  const auto& s = c.optimizer.search;
  const auto& g = c.gp;
  return json{
      {"problem", c.problem_id},
      {"resolution", c.resolution},
      {"budget", c.budget},
      {"initial_design", c.initial_design},
      {"mode", to_string(c.mode)},
      {"seed", c.seed},
      {"optimizer",
       {{"presample_count", c.optimizer.presample_count},
        {"restart_count", c.optimizer.restart_count},
        {"search",
         {{"initial_step", s.initial_step},
          {"contraction_factor", s.contraction_factor},
          {"max_generations", s.max_generations},
          {"max_evals_per_generation", s.max_evals_per_generation},
          {"min_step", s.min_step}}}}},
      {"gp",
       {{"restarts", g.restarts},
        {"lengthscale_min", g.lengthscale_min},
        {"lengthscale_max", g.lengthscale_max},
        {"signal_variance_min", g.signal_variance_min},
        {"signal_variance_max", g.signal_variance_max},
        {"initial_jitter", g.initial_jitter},
        {"max_jitter", g.max_jitter},
        {"max_fit_points", g.max_fit_points}}},
      {"full_refit_until", c.full_refit_until},
      {"refit_period", c.refit_period},
      {"use_feasibility", c.use_feasibility},
      {"feasibility",
       {{"features", c.feasibility.features},
        {"lengthscale", c.feasibility.lengthscale},
        {"l2", c.feasibility.l2},
        {"max_newton_steps", c.feasibility.max_newton_steps}}},
      {"initial_upscaling", c.initial_upscaling},
      {"coarse_partitions", c.coarse_partitions},
  };
}

json to_json(const RunArtifact& a) {
  json history = json::array();
  for (const auto& o : a.history)
    history.push_back(json{{"x", vec(o.x)}, {"y", num(o.y)}, {"b", vec(o.b)}, {"valid", o.valid},
                           {"iteration", o.iteration}});
  json desc = json::array();
  for (const auto& m : a.descriptor_models) desc.push_back(model_json(m));
  json qd = json::array();
  for (double v : a.qd_trace) qd.push_back(v);
  return json{
      {"format", "bopelites-run/1"},
      {"algorithm", a.algorithm},
      {"problem", a.problem_id},
      {"mode", to_string(a.mode)},
      {"resolution", a.resolution},
      {"budget", a.budget},
      {"seed", a.seed},
      {"config", a.config},
      {"qd_score", a.qd_score},
      {"filled", a.filled},
      {"evaluations", a.evaluations},
      {"invalid_evaluations", a.invalid_evaluations},
      {"wall_seconds", a.wall_seconds},
      {"state", {{"omega", a.omega_final}, {"alpha", a.alpha}, {"beta", a.beta}}},
      {"models",
       {{"objective", a.objective_model ? model_json(*a.objective_model) : json(nullptr)}, {"descriptors", desc}}},
      {"qd_trace", qd},
      {"history", history},
      {"trace_csv", "trace.csv"},
      {"archive_csv", "archive.csv"},
  };
}

RunArtifact run_artifact_from_json(const json& j) {
  if (j.value("format", "") != "bopelites-run/1") throw std::runtime_error("not a run artifact");
  RunArtifact a;
  a.algorithm = j.at("algorithm").get<std::string>();
  a.problem_id = j.at("problem").get<std::string>();
  a.mode = parse_mode(j.at("mode").get<std::string>());
  a.resolution = j.at("resolution").get<std::vector<int>>();
  a.budget = j.at("budget").get<long>();
  a.seed = j.at("seed").get<std::uint64_t>();
  a.config = j.at("config");
  a.qd_score = j.at("qd_score").get<double>();
  a.filled = j.at("filled").get<std::size_t>();
  a.evaluations = j.at("evaluations").get<long>();
  a.invalid_evaluations = j.at("invalid_evaluations").get<long>();
  a.wall_seconds = j.at("wall_seconds").get<double>();
  a.omega_final = j.at("state").at("omega").get<double>();
  a.alpha = j.at("state").at("alpha").get<long>();
  a.beta = j.at("state").at("beta").get<long>();
  for (const auto& v : j.at("qd_trace")) a.qd_trace.push_back(v.get<double>());
  for (const auto& h : j.at("history")) {
    Observation o;
    o.x = vec(h.at("x"));
    o.y = num(h.at("y"));
    o.b = vec(h.at("b"));
    o.valid = h.at("valid").get<bool>();
    o.iteration = h.at("iteration").get<long>();
    a.history.push_back(std::move(o));
  }
  const auto& models = j.at("models");
  if (!models.at("objective").is_null()) a.objective_model = model_from(models.at("objective"));
  for (const auto& m : models.at("descriptors")) a.descriptor_models.push_back(model_from(m));
  return a;
}

RunArtifact make_artifact(const std::string& algorithm, const RunResult& r) {
  RunArtifact a;
  a.algorithm = algorithm;
  a.problem_id = r.config.problem_id;
  a.mode = r.config.mode;
  a.resolution = r.config.resolution;
  a.budget = r.config.budget;
  a.seed = r.config.seed;
  a.config = to_json(r.config);
  a.qd_score = r.archive.qd_score();
  a.filled = r.archive.filled_count();
  a.evaluations = r.evaluations;
  a.wall_seconds = r.wall_seconds;
  a.omega_final = r.state.omega;
  a.alpha = r.state.alpha_count;
  a.beta = r.state.beta_count;
  a.history = r.archive.history();
  fill_trace(a, r.trace);
  fill_models(a, r.models);
  return a;
}

RunArtifact make_artifact(const std::string& algorithm, const std::string& problem_id, DescriptorMode mode,
                          const std::vector<int>& resolution, long budget, std::uint64_t seed, const json& config,
                          const BaselineResult& r) {
  RunArtifact a;
  a.algorithm = algorithm;
  a.problem_id = problem_id;
  a.mode = mode;
  a.resolution = resolution;
  a.budget = budget;
  a.seed = seed;
  a.config = config;
  a.qd_score = r.archive.qd_score();
  a.filled = r.archive.filled_count();
  a.evaluations = r.evaluations;
  a.wall_seconds = r.wall_seconds;
  a.history = r.archive.history();
  fill_trace(a, r.trace);
  fill_models(a, r.models);
  return a;
}

Archive replay(const RunArtifact& artifact, const RegionGrid& grid) {
  Archive archive(grid);
  for (const auto& o : artifact.history) archive.offer(o);
  return archive;
}

Surrogates rebuild_models(const RunArtifact& artifact, const Problem& problem) {
  Surrogates s;
  if (!artifact.objective_model) return s;
  std::vector<const Observation*> valid;
  for (const auto& o : artifact.history)
    if (o.valid) valid.push_back(&o);
  const auto n = static_cast<Eigen::Index>(valid.size());
  Eigen::MatrixXd x(n, problem.input_dim());
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = problem.input_box.to_unit(valid[static_cast<std::size_t>(i)]->x).transpose();
    y[i] = valid[static_cast<std::size_t>(i)]->y;
  }
  const auto& om = *artifact.objective_model;
  s.objective = GpModel::condition(x, y, om.params, om.jitter, std::max(om.jitter, 1e-4));
  for (std::size_t j = 0; j < artifact.descriptor_models.size(); ++j) {
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) b[i] = valid[static_cast<std::size_t>(i)]->b[static_cast<Eigen::Index>(j)];
    const auto& dm = artifact.descriptor_models[j];
    s.descriptors.push_back(GpModel::condition(x, b, dm.params, dm.jitter, std::max(dm.jitter, 1e-4)));
  }
  return s;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_json(const std::filesystem::path& path, const json& j) { write_text_atomic(path, j.dump(1) + "\n"); }

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return json::parse(in);
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRecord>& trace) {
  std::ostringstream os;
  const Eigen::Index d = trace.empty() ? 0 : trace.front().x.size();
  Eigen::Index m = 0;
  for (const auto& t : trace) m = std::max(m, t.b.size());
  os << "iteration";
  for (Eigen::Index k = 0; k < d; ++k) os << ",x" << k;
  os << ",y";
  for (Eigen::Index k = 0; k < m; ++k) os << ",b" << k;
  os << ",valid,region,qd_score,omega,alpha,beta,acquisition,wall_seconds\n";
  for (const auto& t : trace) {
    os << t.iteration;
    for (Eigen::Index k = 0; k < d; ++k) os << ',' << fmt(t.x[k]);
    os << ',' << fmt(t.y);
    for (Eigen::Index k = 0; k < m; ++k) os << ',' << (k < t.b.size() ? fmt(t.b[k]) : "");
    os << ',' << (t.valid ? 1 : 0) << ',' << (t.region ? std::to_string(*t.region) : "") << ',' << fmt(t.qd_score)
       << ',' << fmt(t.omega) << ',' << t.alpha << ',' << t.beta << ',' << fmt(t.acquisition) << ','
       << fmt(t.wall_seconds) << '\n';
  }
  write_text_atomic(path, os.str());
}

void write_archive_csv(const std::filesystem::path& path, const Archive& archive) {
  const auto& grid = archive.grid();
  std::ostringstream os;
  Eigen::Index d = 0;
  for (std::size_t r = 0; r < grid.region_count() && d == 0; ++r)
    if (archive.elite(r)) d = archive.elite(r)->x.size();
  os << "region_flat_index,region_multi_index";
  for (Eigen::Index k = 0; k < d; ++k) os << ",x" << k;
  os << ",y";
  for (int k = 0; k < grid.dims(); ++k) os << ",b" << k;
  os << ",iteration_found\n";
  for (std::size_t r = 0; r < grid.region_count(); ++r) {
    const Observation* e = archive.elite(r);
    if (!e) continue;
    os << r << ',' << grid.describe_multi(r);
    for (Eigen::Index k = 0; k < d; ++k) os << ',' << fmt(e->x[k]);
    os << ',' << fmt(e->y);
    for (int k = 0; k < grid.dims(); ++k) os << ',' << fmt(e->b[k]);
    os << ',' << e->iteration << '\n';
  }
  write_text_atomic(path, os.str());
}

void write_pm_csv(const std::filesystem::path& path, const PredictionMap& pm, const Box& input_box,
                  const PredictedScore* scored, const Problem* problem) {
  const auto& grid = pm.grid;
  const int d = input_box.dim();
  std::ostringstream os;
  os << "region_flat_index,region_multi_index";
  for (int k = 0; k < d; ++k) os << ",x" << k;
  os << ",y";
  for (int k = 0; k < grid.dims(); ++k) os << ",b" << k;
  os << ",iteration_found,predicted_value,region_probability,evaluated_true_value,low_confidence,from_history\n";
  for (std::size_t r = 0; r < grid.region_count(); ++r) {
    const auto& p = pm.proposals[r];
    if (!p) continue;
    const Eigen::VectorXd x = input_box.from_unit(p->x);
    const double truth = scored ? scored->true_values[r] : std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd b;
    if (scored && problem && std::isfinite(truth)) b = problem->descriptors(x);
    os << r << ',' << grid.describe_multi(r);
    for (int k = 0; k < d; ++k) os << ',' << fmt(x[k]);
    os << ',' << fmt(truth);
    for (int k = 0; k < grid.dims(); ++k) os << ',' << (b.size() > k ? fmt(b[k]) : "");
    os << ",-1," << fmt(p->predicted_value) << ',' << fmt(p->region_probability) << ',' << fmt(truth) << ','
       << (p->low_confidence ? 1 : 0) << ',' << (p->from_history ? 1 : 0) << '\n';
  }
  write_text_atomic(path, os.str());
}

json to_json(const PredictionMap& pm) {
  json cells = json::array();
  for (std::size_t r = 0; r < pm.proposals.size(); ++r) {
    const auto& p = pm.proposals[r];
    if (!p) continue;
    cells.push_back(json{{"region", r},
                         {"x", vec(p->x)},
                         {"predicted_value", p->predicted_value},
                         {"region_probability", p->region_probability},
                         {"score", p->score},
                         {"low_confidence", p->low_confidence},
                         {"from_history", p->from_history}});
  }
  return json{{"format", "bopelites-pm/1"},
              {"mode", to_string(pm.mode)},
              {"grid",
               {{"lower", vec(pm.grid.lower())}, {"upper", vec(pm.grid.upper())}, {"partitions", pm.grid.partitions()}}},
              {"proposals", cells}};
}

PredictionMap prediction_map_from_json(const json& j) {
  if (j.value("format", "") != "bopelites-pm/1") throw std::runtime_error("not a prediction map");
  PredictionMap pm;
  pm.mode = parse_mode(j.at("mode").get<std::string>());
  const auto& g = j.at("grid");
  pm.grid = RegionGrid(vec(g.at("lower")), vec(g.at("upper")), g.at("partitions").get<std::vector<int>>());
  pm.proposals.assign(pm.grid.region_count(), std::nullopt);
  for (const auto& c : j.at("proposals")) {
    PmProposal p;
    p.x = vec(c.at("x"));
    p.predicted_value = c.at("predicted_value").get<double>();
    p.region_probability = c.at("region_probability").get<double>();
    p.score = c.at("score").get<double>();
    p.low_confidence = c.at("low_confidence").get<bool>();
    p.from_history = c.at("from_history").get<bool>();
    pm.proposals.at(c.at("region").get<std::size_t>()) = p;
  }
  return pm;
}

void write_run_dir(const std::filesystem::path& dir, const RunArtifact& artifact,
                   const std::vector<TraceRecord>& trace, const Archive& archive) {
  std::filesystem::create_directories(dir);
  write_trace_csv(dir / "trace.csv", trace);
  write_archive_csv(dir / "archive.csv", archive);
  // run.json last: its presence marks a complete run.
  write_json(dir / "run.json", to_json(artifact));
}

}  // namespace bope
