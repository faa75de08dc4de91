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

#include "bopelites/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/algorithm/string.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/property_tree/info_parser.hpp>

#include "bopelites/benchmarks.hpp"
#include "bopelites/seed.hpp"

namespace bope {

using nlohmann::json;
namespace pt = boost::property_tree;

namespace {

enum Stream : std::uint64_t { kPm = 31 };

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(", \t"), boost::token_compress_on);
  parts.erase(std::remove_if(parts.begin(), parts.end(), [](const std::string& s) { return s.empty(); }), parts.end());
  return parts;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& key) {
  std::vector<T> out;
  for (const auto& p : split_list(text)) {
    try {
      if constexpr (std::is_same_v<T, int>) {
        out.push_back(std::stoi(p));
      } else {
        out.push_back(static_cast<T>(std::stoull(p)));
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("config: bad list entry '" + p + "' for " + key);
    }
  }
  return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config: expected a boolean for " + key + ", got '" + v + "'");
}

template <typename T>
T parse_number(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    T out;
    if constexpr (std::is_floating_point_v<T>) {
      out = static_cast<T>(std::stod(v, &used));
    } else {
      out = static_cast<T>(std::stoll(v, &used));
    }
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number '" + v + "' for " + key);
  }
}

void apply_cell_key(CellSpec& c, const std::string& key, const std::string& v) {
  if (key == "algorithm") {
    static const std::set<std::string> known{"bop_elites", "map_elites", "sobol", "sail", "sphen"};
    if (!known.count(v)) throw std::invalid_argument("config: unknown algorithm '" + v + "'");
    c.algorithm = v;
  } else if (key == "problem") {
    c.problem = v;
  } else if (key == "mode") {
    c.mode = parse_mode(v);
  } else if (key == "resolution") {
    c.resolution = parse_list<int>(v, key);
  } else if (key == "budget") {
    c.budget = parse_number<long>(v, key);
  } else if (key == "group") {
    c.group = v;
  } else if (key == "initial_design") {
    c.bop.initial_design = parse_number<long>(v, key);
    c.sail.initial_design = c.bop.initial_design;
  } else if (key == "use_feasibility") {
    c.bop.use_feasibility = parse_bool(v, key);
  } else if (key == "initial_upscaling") {
    c.bop.initial_upscaling = parse_bool(v, key);
  } else if (key == "coarse_partitions") {
    c.bop.coarse_partitions = parse_number<int>(v, key);
  } else if (key == "presample_count") {
    c.bop.optimizer.presample_count = parse_number<int>(v, key);
  } else if (key == "restart_count") {
    c.bop.optimizer.restart_count = parse_number<int>(v, key);
  } else if (key == "full_refit_until") {
    c.bop.full_refit_until = c.sail.full_refit_until = parse_number<long>(v, key);
  } else if (key == "refit_period") {
    c.bop.refit_period = c.sail.refit_period = parse_number<long>(v, key);
  } else if (key == "gp_restarts") {
    c.bop.gp.restarts = c.sail.gp.restarts = parse_number<int>(v, key);
  } else if (key == "max_fit_points") {
    c.bop.gp.max_fit_points = c.sail.gp.max_fit_points = parse_number<int>(v, key);
  } else if (key == "mutation_sigma") {
    c.map_elites.mutation_sigma = c.sail.inner.mutation_sigma = parse_number<double>(v, key);
  } else if (key == "children_per_generation") {
    c.map_elites.children_per_generation = c.sail.inner.children_per_generation = parse_number<int>(v, key);
  } else if (key == "initial_batch") {
    c.map_elites.initial_batch = parse_number<int>(v, key);
  } else if (key == "beta_ucb") {
    c.sail.beta_ucb = parse_number<double>(v, key);
  } else if (key == "inner_generations") {
    c.sail.inner_generations = parse_number<int>(v, key);
  } else if (key == "pm") {
    c.build_pm = parse_bool(v, key);
  } else if (key == "pm_generations") {
    c.pm.generations = parse_number<int>(v, key);
  } else if (key == "pm_sobol_seeds") {
    c.pm.sobol_seeds = parse_number<int>(v, key);
  } else {
    throw std::invalid_argument("config: unknown cell key '" + key + "'");
  }
}

void apply_cell_tree(CellSpec& c, const pt::ptree& tree, const std::string& where) {
  for (const auto& [key, child] : tree) {
    if (!child.empty()) throw std::invalid_argument("config: unexpected section '" + key + "' in " + where);
    apply_cell_key(c, key, boost::trim_copy(child.data()));
  }
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt_resolution(const std::vector<int>& r) {
  std::string s;
  for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "x" : "") + std::to_string(r[i]);
  return s;
}

}  // namespace

std::string CellSpec::group_key() const {
  if (!group.empty()) return group;
  return problem + "/" + (resolution.empty() ? std::string("default") : fmt_resolution(resolution));
}

json CellSpec::fingerprint() const {
  json j{{"name", name},           {"algorithm", algorithm},     {"problem", problem},
         {"mode", to_string(mode)}, {"resolution", resolution}, {"budget", budget},
         {"group", group_key()},   {"pm", build_pm}};
  if (algorithm == "bop_elites") {
    RunConfig rc = bop;
    rc.problem_id = problem;
    rc.resolution = resolution;
    rc.budget = budget;
    rc.mode = mode;
    rc.seed = 0;
    j["bop_elites"] = to_json(rc);
    j["bop_elites"].erase("seed");
  } else if (algorithm == "map_elites") {
    j["map_elites"] = {{"mutation_sigma", map_elites.mutation_sigma},
                       {"children_per_generation", map_elites.children_per_generation},
                       {"initial_batch", map_elites.initial_batch}};
  } else if (algorithm == "sail" || algorithm == "sphen") {
    j["sail"] = {{"beta_ucb", sail.beta_ucb},
                 {"inner_generations", sail.inner_generations},
                 {"mutation_sigma", sail.inner.mutation_sigma},
                 {"children_per_generation", sail.inner.children_per_generation},
                 {"initial_design", sail.initial_design},
                 {"full_refit_until", sail.full_refit_until},
                 {"refit_period", sail.refit_period},
                 {"gp_restarts", sail.gp.restarts},
                 {"max_fit_points", sail.gp.max_fit_points}};
  }
  if (build_pm) j["pm_settings"] = {{"generations", pm.generations}, {"sobol_seeds", pm.sobol_seeds}};
  return j;
}

ExperimentSpec parse_experiment(const pt::ptree& tree) {
  ExperimentSpec spec;
  CellSpec defaults;
  const pt::ptree* cells = nullptr;
  for (const auto& [key, child] : tree) {
    const std::string v = boost::trim_copy(child.data());
    if (key == "name") {
      spec.name = v;
    } else if (key == "output_dir") {
      spec.output_dir = v;
    } else if (key == "seeds") {
      spec.seeds = parse_list<std::uint64_t>(v, key);
    } else if (key == "normalize") {
      spec.normalize = parse_bool(v, key);
    } else if (key == "confidence") {
      spec.confidence = parse_number<double>(v, key);
    } else if (key == "jobs") {
      spec.jobs = parse_number<int>(v, key);
    } else if (key == "reuse") {
      spec.reuse = parse_bool(v, key);
    } else if (key == "defaults") {
      apply_cell_tree(defaults, child, "defaults");
    } else if (key == "cells") {
      cells = &child;
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  if (!cells || cells->empty()) throw std::invalid_argument("config: no cells defined");
  std::set<std::string> names;
  for (const auto& [name, child] : *cells) {
    if (!names.insert(name).second) throw std::invalid_argument("config: duplicate cell '" + name + "'");
    CellSpec c = defaults;
    c.name = name;
    apply_cell_tree(c, child, "cell " + name);
    spec.cells.push_back(std::move(c));
  }
  if (spec.seeds.empty()) throw std::invalid_argument("config: at least one seed is required");
  if (!(spec.confidence > 0.0 && spec.confidence < 1.0))
    throw std::invalid_argument("config: confidence must lie in (0,1)");
  if (spec.jobs < 1) throw std::invalid_argument("config: jobs must be positive");
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& file, const std::vector<std::string>& overrides) {
  pt::ptree tree;
  pt::read_info(file.string(), tree);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("override must be path=value: '" + o + "'");
    tree.put(o.substr(0, eq), o.substr(eq + 1));
  }
  return parse_experiment(tree);
}

std::filesystem::path resolve_output(const std::filesystem::path& dir) {
  if (dir.is_absolute()) return dir;
  if (const char* root = std::getenv("BOPE_OUTPUT_ROOT"); root && *root) return std::filesystem::path(root) / dir;
  return dir;
}

PredictionMap build_pm_for_run(const Problem& problem, const Surrogates& models, DescriptorMode mode,
                               const std::vector<Observation>& history, const RegionGrid& grid,
                               const PmConfig& config) {
  if (!models.objective) throw std::invalid_argument("prediction map: no objective model");
  Eigen::MatrixXd seeds(0, problem.input_dim());
  for (const auto& o : history) {
    if (!o.valid) continue;
    seeds.conservativeResize(seeds.rows() + 1, Eigen::NoChange);
    seeds.row(seeds.rows() - 1) = problem.input_box.to_unit(o.x).transpose();
  }
  if (mode == DescriptorMode::WhiteBox || models.descriptors.empty())
    return build_pm_whitebox(*models.objective, grid,
                             [&](const Eigen::MatrixXd& p) { return problem.descriptors_unit(p); }, seeds, config);
  return build_pm_blackbox(*models.objective, models.descriptors, grid, seeds, config);
}

RunOutcome run_cell(const CellSpec& cell, std::uint64_t seed, const std::filesystem::path& dir, bool reuse) {
  RunOutcome out;
  out.cell = cell.name;
  out.seed = seed;
  out.dir = dir;
  const json fp = cell.fingerprint();

  if (reuse && std::filesystem::exists(dir / "run.json")) {
    try {
      RunArtifact a = run_artifact_from_json(read_json(dir / "run.json"));
      const bool pm_ready = !cell.build_pm || std::filesystem::exists(dir / "pm.json");
      if (a.config.value("cell", json()) == fp && a.seed == seed && pm_ready) {
        out.artifact = std::move(a);
        if (cell.build_pm) out.pm_score = read_json(dir / "pm.json").at("score").get<double>();
        out.ok = true;
        out.reused = true;
        return out;
      }
    } catch (const std::exception&) {
      // Unreadable or stale: run again.
    }
  }

  try {
    const Problem problem = make_problem(cell.problem);
    const std::vector<int> res = cell.resolution.empty() ? problem.default_resolution : cell.resolution;
    const RegionGrid grid = problem.grid(res);
    RunArtifact artifact;
    std::vector<TraceRecord> trace;
    Archive archive;
    Surrogates models;
    if (cell.algorithm == "bop_elites") {
      RunConfig rc = cell.bop;
      rc.problem_id = cell.problem;
      rc.resolution = res;
      rc.budget = cell.budget;
      rc.mode = cell.mode;
      rc.seed = seed;
      RunResult r = run_bop_elites(problem, rc);
      artifact = make_artifact(cell.algorithm, r);
      trace = std::move(r.trace);
      archive = std::move(r.archive);
      models = std::move(r.models);
    } else {
      BaselineResult r;
      if (cell.algorithm == "map_elites") {
        r = map_elites_run(problem, grid, cell.budget, cell.map_elites, seed);
      } else if (cell.algorithm == "sobol") {
        r = sobol_run(problem, grid, cell.budget, seed);
      } else if (cell.algorithm == "sail") {
        r = sail_run(problem, grid, cell.budget, cell.sail, seed);
      } else if (cell.algorithm == "sphen") {
        r = sphen_run(problem, grid, cell.budget, cell.sail, seed);
      } else {
        throw std::invalid_argument("unknown algorithm '" + cell.algorithm + "'");
      }
      artifact = make_artifact(cell.algorithm, cell.problem, cell.mode, res, cell.budget, seed, json::object(), r);
      trace = std::move(r.trace);
      archive = std::move(r.archive);
      models = std::move(r.models);
    }
    artifact.config = json{{"cell", fp}, {"cell_name", cell.name}, {"run", artifact.config}};

    std::filesystem::create_directories(dir);
    if (cell.build_pm && models.objective) {
      PmConfig pc = cell.pm;
      pc.seed = derive_seed(seed, kPm);
      pc.low_confidence_threshold = artifact.omega_final;
      const PredictionMap pm = build_pm_for_run(problem, models, cell.mode, archive.history(), grid, pc);
      const PredictedScore scored = score_pm(problem, pm);
      write_pm_csv(dir / "pm.csv", pm, problem.input_box, &scored, &problem);
      write_json(dir / "pm.json", json{{"problem", cell.problem}, {"score", scored.total}, {"filled", pm.filled()}, {"pm", to_json(pm)}});
      out.pm_score = scored.total;
    }
    write_run_dir(dir, artifact, trace, archive);
    out.artifact = std::move(artifact);
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

MeanSe mean_se(std::span<const double> values) {
  MeanSe m;
  m.n = values.size();
  if (m.n == 0) {
    m.mean = std::numeric_limits<double>::quiet_NaN();
    return m;
  }
  m.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(m.n);
  if (m.n < 2) return m;
  double ss = 0.0;
  for (double v : values) ss += (v - m.mean) * (v - m.mean);
  m.se = std::sqrt(ss / static_cast<double>(m.n - 1)) / std::sqrt(static_cast<double>(m.n));
  return m;
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b, double confidence) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_t_test: need at least two values per sample");
  const MeanSe ma = mean_se(a), mb = mean_se(b);
  const double va = ma.se * ma.se, vb = mb.se * mb.se;  // s^2 / n
  WelchResult r;
  const double diff = ma.mean - mb.mean;
  if (va + vb == 0.0) {
    r.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    r.df = static_cast<double>(a.size() + b.size() - 2);
    r.p_value = diff == 0.0 ? 1.0 : 0.0;
  } else {
    r.t = diff / std::sqrt(va + vb);
    r.df = (va + vb) * (va + vb) /
           (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
    boost::math::students_t dist(r.df);
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  }
  r.significant = r.p_value < 1.0 - confidence;
  return r;
}

std::vector<ConvergenceRow> emit_convergence(const std::string& cell, const std::vector<std::vector<double>>& traces) {
  std::size_t longest = 0;
  for (const auto& t : traces) longest = std::max(longest, t.size());
  std::vector<ConvergenceRow> rows;
  std::vector<double> column;
  for (std::size_t i = 0; i < longest; ++i) {
    column.clear();
    for (const auto& t : traces)
      if (i < t.size()) column.push_back(t[i]);
    rows.push_back(ConvergenceRow{cell, static_cast<long>(i + 1), mean_se(column)});
  }
  return rows;
}

ExperimentReport aggregate(const std::vector<CellSpec>& cells, const std::vector<RunOutcome>& outcomes,
                           bool normalize, double confidence) {
  ExperimentReport rep;
  std::map<std::string, std::vector<const RunOutcome*>> by_cell;
  std::map<std::string, std::size_t> failures;
  for (const auto& o : outcomes) {
    if (o.ok) {
      by_cell[o.cell].push_back(&o);
    } else {
      ++failures[o.cell];
    }
  }

  // Per-seed best within each group.
  std::map<std::pair<std::string, std::uint64_t>, double> best;
  for (const auto& c : cells)
    for (const auto* o : by_cell[c.name]) {
      const auto key = std::make_pair(c.group_key(), o->seed);
      auto it = best.find(key);
      if (it == best.end() || o->artifact.qd_score > it->second) best[key] = o->artifact.qd_score;
    }

  std::map<std::string, std::vector<std::pair<std::string, std::vector<double>>>> group_scores;
  for (const auto& c : cells) {
    SummaryRow row;
    row.cell = c.name;
    row.algorithm = c.algorithm;
    row.group = c.group_key();
    row.failures = failures[c.name];
    std::vector<double> qd, norm, pm;
    std::vector<std::vector<double>> traces;
    for (const auto* o : by_cell[c.name]) {
      qd.push_back(o->artifact.qd_score);
      const double b = best[{row.group, o->seed}];
      const double nv = b != 0.0 ? o->artifact.qd_score / b : 1.0;
      norm.push_back(nv);
      rep.normalized[{c.name, o->seed}] = nv;
      if (o->pm_score) pm.push_back(*o->pm_score);
      traces.push_back(o->artifact.qd_trace);
    }
    row.qd = mean_se(qd);
    row.normalized = normalize ? mean_se(norm) : MeanSe{std::numeric_limits<double>::quiet_NaN(), 0.0, 0};
    if (!pm.empty()) row.pm = mean_se(pm);
    rep.summary.push_back(row);
    group_scores[row.group].emplace_back(c.name, qd);
    auto conv = emit_convergence(c.name, traces);
    rep.convergence.insert(rep.convergence.end(), conv.begin(), conv.end());
  }

  for (auto& [group, entries] : group_scores) {
    std::vector<std::pair<std::string, std::vector<double>>> usable;
    for (const auto& e : entries)
      if (e.second.size() >= 2) usable.push_back(e);
    if (usable.size() < 2) continue;
    std::stable_sort(usable.begin(), usable.end(), [](const auto& a, const auto& b) {
      return mean_se(a.second).mean > mean_se(b.second).mean;
    });
    rep.tests.push_back(TestRow{group, usable[0].first, usable[1].first,
                                welch_t_test(usable[0].second, usable[1].second, confidence)});
  }
  return rep;
}

void write_report(const std::filesystem::path& dir, const ExperimentReport& rep) {
  std::ostringstream s;
  s << "cell,algorithm,group,replications,mean_qd,se_qd,normalized_mean,normalized_se,pm_mean,pm_se,failures\n";
  for (const auto& r : rep.summary) {
    s << r.cell << ',' << r.algorithm << ',' << r.group << ',' << r.qd.n << ',' << fmt(r.qd.mean) << ','
      << fmt(r.qd.se) << ',' << fmt(r.normalized.mean) << ',' << fmt(r.normalized.se) << ','
      << (r.pm ? fmt(r.pm->mean) : "") << ',' << (r.pm ? fmt(r.pm->se) : "") << ',' << r.failures << '\n';
  }
  write_text_atomic(dir / "summary.csv", s.str());

  std::ostringstream t;
  t << "group,best,runner_up,t,df,p_value,significant\n";
  for (const auto& r : rep.tests)
    t << r.group << ',' << r.best << ',' << r.runner_up << ',' << fmt(r.result.t) << ',' << fmt(r.result.df) << ','
      << fmt(r.result.p_value) << ',' << (r.result.significant ? 1 : 0) << '\n';
  write_text_atomic(dir / "tests.csv", t.str());

  std::ostringstream n;
  n << "cell,seed,normalized_qd\n";
  for (const auto& [key, v] : rep.normalized) n << key.first << ',' << key.second << ',' << fmt(v) << '\n';
  write_text_atomic(dir / "normalized.csv", n.str());

  std::ostringstream c;
  c << "cell,evaluation,mean_qd,se_qd,replications\n";
  for (const auto& r : rep.convergence)
    c << r.cell << ',' << r.evaluation << ',' << fmt(r.qd.mean) << ',' << fmt(r.qd.se) << ',' << r.qd.n << '\n';
  write_text_atomic(dir / "convergence.csv", c.str());
}

ExperimentResult run_experiment(const ExperimentSpec& spec, std::ostream* log) {
  const std::filesystem::path root = resolve_output(spec.output_dir);
  std::vector<std::pair<const CellSpec*, std::uint64_t>> jobs;
  for (const auto& c : spec.cells)
    for (auto s : spec.seeds) jobs.emplace_back(&c, s);

  ExperimentResult result;
  result.runs.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& [cell, seed] = jobs[i];
      const auto dir = root / "runs" / cell->name / ("seed_" + std::to_string(seed));
      result.runs[i] = run_cell(*cell, seed, dir, spec.reuse);
      if (log) {
        std::lock_guard<std::mutex> lock(log_mutex);
        const auto& o = result.runs[i];
        *log << cell->name << " seed " << seed << ": ";
        if (o.ok) {
          *log << "qd " << fmt(o.artifact.qd_score) << (o.reused ? " (cached)" : "");
          if (o.pm_score) *log << " pm " << fmt(*o.pm_score);
        } else {
          *log << "FAILED " << o.error;
        }
        *log << std::endl;
      }
    }
  };
  const int threads = std::max(1, std::min<int>(spec.jobs, static_cast<int>(jobs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const auto& o : result.runs) result.failures += !o.ok;
  result.report = aggregate(spec.cells, result.runs, spec.normalize, spec.confidence);
  write_report(root, result.report);
  std::ostringstream f;
  f << "cell,seed,error\n";
  for (const auto& o : result.runs)
    if (!o.ok) f << o.cell << ',' << o.seed << ",\"" << boost::replace_all_copy(o.error, "\"", "'") << "\"\n";
  write_text_atomic(root / "failures.csv", f.str());
  return result;
}

ExperimentReport report_directory(const std::filesystem::path& dir, bool normalize, double confidence) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() == "run.json") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::vector<CellSpec> cells;
  std::vector<RunOutcome> outcomes;
  for (const auto& f : files) {
    RunOutcome o;
    o.artifact = run_artifact_from_json(read_json(f));
    o.cell = o.artifact.config.value("cell_name", o.artifact.algorithm);
    o.seed = o.artifact.seed;
    o.ok = true;
    o.dir = f.parent_path();
    if (std::filesystem::exists(o.dir / "pm.json")) o.pm_score = read_json(o.dir / "pm.json").at("score").get<double>();
    if (std::none_of(cells.begin(), cells.end(), [&](const CellSpec& c) { return c.name == o.cell; })) {
      CellSpec c;
      c.name = o.cell;
      c.algorithm = o.artifact.algorithm;
      c.problem = o.artifact.problem_id;
      const json fp = o.artifact.config.value("cell", json::object());
      c.group = fp.value("group", o.artifact.problem_id + "/" + fmt_resolution(o.artifact.resolution));
      cells.push_back(c);
    }
    outcomes.push_back(std::move(o));
  }
  return aggregate(cells, outcomes, normalize, confidence);
}

}  // namespace bope
