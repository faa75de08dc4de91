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

// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status 1
// if any fails. Benchmark runs are cached under the cache directory and
// reused while their settings fingerprint matches.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bopelites/acquisition.hpp"
#include "bopelites/benchmarks.hpp"
#include "bopelites/harness.hpp"
#include "bopelites/seed.hpp"
#include "bopelites/sobol.hpp"

namespace fs = std::filesystem;
using namespace bope;

namespace {

// Thresholds.
constexpr double kMishraWhiteMin = 13740.0;
constexpr double kMishraBlackMin = 78000.0;
constexpr double kRobotArmMin = 84.0;
constexpr double kSyntheticNormalizedMin = 0.99;
constexpr double kDominanceConfidence = 0.95;
constexpr double kUpscaleRatioMin = 1.8;
constexpr double kInvalidRatioMax = 0.5;
constexpr double kMcSigmas = 3.0;
constexpr int kMcSamples = 100000;
constexpr double kGpOracleTol = 1e-6;

const std::vector<std::uint64_t> kSeeds{0, 1, 2, 3, 4};

struct Line {
  std::string id;
  bool pass = false;
  std::string detail;
};

std::string num(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

class Cache {
 public:
  Cache(fs::path root, bool verbose) : root_(std::move(root)), verbose_(verbose) {}

  RunOutcome run(const CellSpec& cell, std::uint64_t seed) {
    const fs::path dir = root_ / "runs" / cell.name / ("seed_" + std::to_string(seed));
    RunOutcome o = run_cell(cell, seed, dir, true);
    if (verbose_)
      std::cerr << "  " << cell.name << " seed " << seed << ": "
                << (o.ok ? "qd " + num(o.artifact.qd_score, 10) + (o.reused ? " (cached)" : "") : o.error)
                << std::endl;
    if (!o.ok) throw std::runtime_error(cell.name + " seed " + std::to_string(seed) + ": " + o.error);
    return o;
  }

  std::vector<RunOutcome> runs(const CellSpec& cell) {
    std::vector<RunOutcome> out;
    for (auto s : kSeeds) out.push_back(run(cell, s));
    return out;
  }

  const fs::path& root() const { return root_; }

 private:
  fs::path root_;
  bool verbose_;
};

std::vector<double> scores(const std::vector<RunOutcome>& runs) {
  std::vector<double> v;
  for (const auto& r : runs) v.push_back(r.artifact.qd_score);
  return v;
}

CellSpec bop(const std::string& name, const std::string& problem, DescriptorMode mode, std::vector<int> res,
             long budget) {
  CellSpec c;
  c.name = name;
  c.algorithm = "bop_elites";
  c.problem = problem;
  c.mode = mode;
  c.resolution = std::move(res);
  c.budget = budget;
  return c;
}

CellSpec other(const std::string& name, const std::string& algorithm, const CellSpec& like) {
  CellSpec c = like;
  c.name = name;
  c.algorithm = algorithm;
  return c;
}

std::string mean_text(const std::vector<double>& v) {
  const MeanSe m = mean_se(v);
  return num(m.mean, 9) + " (se " + num(m.se, 3) + ", n " + std::to_string(m.n) + ")";
}

// Cell definitions shared between criteria.
const CellSpec kMishraWhite = bop("mishra_wb_10x10", "mishra", DescriptorMode::WhiteBox, {10, 10}, 1000);
const CellSpec kMishraBlack = bop("mishra_bb_25x25", "mishra", DescriptorMode::BlackBox, {25, 25}, 1250);
const CellSpec kMishraBlack50 = bop("mishra_bb_50x50", "mishra", DescriptorMode::BlackBox, {50, 50}, 1250);
const CellSpec kRobotArm = bop("robot_arm_wb_10x10", "robot_arm", DescriptorMode::WhiteBox, {10, 10}, 1000);
const CellSpec kRosenbrock = bop("rosenbrock6_wb_10x10", "rosenbrock6", DescriptorMode::WhiteBox, {10, 10}, 1000);
const CellSpec kDisk = bop("invalid_disk_bb_10x10", "invalid_disk", DescriptorMode::BlackBox, {10, 10}, 500);

CellSpec disk_without_feasibility() {
  CellSpec c = kDisk;
  c.name = "invalid_disk_bb_10x10_nofeas";
  c.bop.use_feasibility = false;
  return c;
}

// Synthetic GP: one function per replication seed.
std::vector<RunOutcome> synthetic_runs(Cache& cache, const std::string& algorithm) {
  CellSpec c = bop("synthetic_" + algorithm, "", DescriptorMode::BlackBox, {10}, 1000);
  c.algorithm = algorithm;
  c.group = "synthetic_gp";
  // Ten inputs: a lighter likelihood search keeps each run near a quarter hour.
  c.bop.gp.restarts = c.sail.gp.restarts = 3;
  c.bop.full_refit_until = c.sail.full_refit_until = 150;
  std::vector<RunOutcome> out;
  for (auto s : kSeeds) {
    c.problem = "synthetic_gp:" + std::to_string(s) + ":1";
    out.push_back(cache.run(c, s));
  }
  return out;
}

Line mishra_white(Cache& cache) {
  const auto v = scores(cache.runs(kMishraWhite));
  const double m = mean_se(v).mean;
  return {"mishra-white-box-10x10", m >= kMishraWhiteMin, "mean QDs " + mean_text(v) + " vs >= " + num(kMishraWhiteMin)};
}

Line mishra_black(Cache& cache) {
  const auto b = scores(cache.runs(kMishraBlack));
  const auto s = scores(cache.runs(other("mishra_bb_25x25_sphen", "sphen", kMishraBlack)));
  const double mb = mean_se(b).mean, ms = mean_se(s).mean;
  return {"mishra-black-box-25x25", mb >= kMishraBlackMin && mb > ms,
          "mean QDs " + mean_text(b) + " vs >= " + num(kMishraBlackMin) + "; SPHEN " + mean_text(s)};
}

Line robot_arm(Cache& cache) {
  const auto v = scores(cache.runs(kRobotArm));
  const double m = mean_se(v).mean;
  return {"robot-arm-white-box-10x10", m >= kRobotArmMin, "mean QDs " + mean_text(v) + " vs >= " + num(kRobotArmMin)};
}

// Per-seed normalised scores for the four synthetic-GP algorithms.
std::map<std::string, std::vector<double>> synthetic_normalized(Cache& cache) {
  const std::vector<std::string> algs{"bop_elites", "sphen", "map_elites", "sobol"};
  std::map<std::string, std::vector<RunOutcome>> runs;
  for (const auto& a : algs) runs[a] = synthetic_runs(cache, a);
  std::map<std::string, std::vector<double>> norm;
  for (std::size_t i = 0; i < kSeeds.size(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& a : algs) best = std::max(best, runs[a][i].artifact.qd_score);
    for (const auto& a : algs) norm[a].push_back(runs[a][i].artifact.qd_score / best);
  }
  return norm;
}

Line synthetic(Cache& cache) {
  const auto norm = synthetic_normalized(cache);
  const double m = mean_se(norm.at("bop_elites")).mean;
  std::string others;
  for (const auto& a : {"sphen", "map_elites", "sobol"}) others += std::string("; ") + a + " " + num(mean_se(norm.at(a)).mean, 4);
  return {"synthetic-gp-normalized", m >= kSyntheticNormalizedMin,
          "BOP-Elites normalised " + mean_text(norm.at("bop_elites")) + " vs >= " + num(kSyntheticNormalizedMin) + others};
}

Line dominance(Cache& cache) {
  bool all = true;
  std::string detail;
  auto compare = [&](const std::string& label, const std::vector<double>& b, const std::vector<double>& m) {
    const WelchResult w = welch_t_test(b, m, kDominanceConfidence);
    const bool ok = mean_se(b).mean > mean_se(m).mean && w.significant;
    all = all && ok;
    detail += (detail.empty() ? "" : "; ") + label + " " + num(mean_se(b).mean) + " vs " + num(mean_se(m).mean) +
              " p=" + num(w.p_value, 3) + (ok ? "" : " (not dominant)");
  };
  for (const CellSpec* c : {&kMishraWhite, &kMishraBlack, &kRobotArm, &kRosenbrock, &kDisk}) {
    compare(c->name, scores(cache.runs(*c)), scores(cache.runs(other(c->name + "_me", "map_elites", *c))));
  }
  const auto norm = synthetic_normalized(cache);
  compare("synthetic_gp (normalised)", norm.at("bop_elites"), norm.at("map_elites"));
  return {"dominance-over-map-elites", all, detail};
}

Line upscaling(Cache& cache) {
  std::vector<double> up, direct;
  for (auto s : kSeeds) {
    const RunOutcome coarse = cache.run(kMishraBlack, s);
    const fs::path f = coarse.dir / "upscaled_50x50.json";
    double score = 0.0;
    bool have = false;
    if (fs::exists(f)) {
      const auto j = read_json(f);
      if (j.value("source_qd", -1.0) == coarse.artifact.qd_score) {
        score = j.at("score").get<double>();
        have = true;
      }
    }
    if (!have) {
      const Problem p = make_problem("mishra");
      const Surrogates models = rebuild_models(coarse.artifact, p);
      PmConfig cfg;
      cfg.seed = derive_seed(s, 41);
      const PredictionMap pm =
          upscale(models, DescriptorMode::BlackBox, [&](const Eigen::MatrixXd& q) { return p.descriptors_unit(q); },
                  coarse.artifact.history, p.input_box, p.grid({50, 50}), cfg);
      score = score_pm(p, pm).total;
      write_json(f, nlohmann::json{{"problem", "mishra"}, {"source_qd", coarse.artifact.qd_score}, {"score", score},
                                   {"pm", to_json(pm)}});
    }
    up.push_back(score);
    direct.push_back(cache.run(kMishraBlack50, s).artifact.qd_score);
  }
  const double ratio = mean_se(up).mean / mean_se(direct).mean;
  return {"upscale-25x25-to-50x50", ratio >= kUpscaleRatioMin,
          "upscaled true QDs " + mean_text(up) + ", direct 50x50 " + mean_text(direct) + ", ratio " + num(ratio, 4) +
              " vs >= " + num(kUpscaleRatioMin)};
}

Line invalid_region(Cache& cache) {
  auto fraction = [&](const CellSpec& c) {
    std::vector<double> f;
    for (const auto& r : cache.runs(c))
      f.push_back(static_cast<double>(r.artifact.invalid_evaluations) / static_cast<double>(r.artifact.evaluations));
    return mean_se(f).mean;
  };
  const double with = fraction(kDisk), without = fraction(disk_without_feasibility());
  return {"invalid-region-handling", with < kInvalidRatioMax * without,
          "invalid fraction with feasibility " + num(with, 4) + ", without " + num(without, 4) + ", need < " +
              num(kInvalidRatioMax) + "x"};
}

// Property suites.

bool gp_oracle_suite(std::string& detail) {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const int d = 1 + trial, n = 15 + 5 * trial;
    ScrambledSobol s(d, rng());
    const Eigen::MatrixXd x = s.draw(n);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = std::sin(3 * x.row(i).sum()) + 2 * x(i, 0);
    KernelParams p;
    p.lengthscales = Eigen::VectorXd::LinSpaced(d, 0.3, 0.8);
    p.signal_variance = 0.7 + trial;
    const GpModel gp = GpModel::condition(x, y, p);
    const Eigen::MatrixXd c = cross_kernel(x, x, p) +
                              gp.jitter() * p.signal_variance * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd q = s.draw(20);
    const double m = gp.target_mean(), sc = gp.target_scale();
    const Eigen::VectorXd a = c.fullPivLu().solve((y.array() - m).matrix());
    for (int i = 0; i < q.rows(); ++i) {
      const Eigen::VectorXd k = cross_kernel(q.row(i), x, p).transpose();
      const double mean = m + k.dot(a);
      const double var = sc * sc * (p.signal_variance - k.dot(c.fullPivLu().solve(k)));
      const Posterior post = gp.predict(q.row(i).transpose());
      worst = std::max(worst, std::abs(post.mean - mean) / (1.0 + std::abs(mean)));
      worst = std::max(worst, std::abs(post.std * post.std - var) / (sc * sc * p.signal_variance));
    }
    Eigen::VectorXd mu, sd;
    gp.predict_batch(x, mu, sd);
    worst = std::max(worst, (mu - y).cwiseAbs().maxCoeff() / (1.0 + y.cwiseAbs().maxCoeff()));
  }
  detail += "gp max rel err " + num(worst, 3);
  return worst < kGpOracleTol;
}

bool ei_mc_suite(std::string& detail) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  bool ok = true;
  int cases = 0;
  // EI against its Monte Carlo estimate.
  for (const auto& [m, s, f] :
       std::vector<std::tuple<double, double, double>>{{0, 1, 0}, {1.5, 0.3, 1.0}, {-2, 2, 0.5}, {3, 1, 4}}) {
    double sum = 0, sq = 0;
    for (int i = 0; i < kMcSamples; ++i) {
      const double v = std::max(m + s * z(rng) - f, 0.0);
      sum += v;
      sq += v * v;
    }
    const double mean = sum / kMcSamples, se = std::sqrt(std::max(sq / kMcSamples - mean * mean, 0.0) / kMcSamples);
    ok = ok && std::abs(ei_region({m, s}, f) - mean) <= kMcSigmas * se + 1e-12;
    ++cases;
  }
  // EJIE and cut-off EJIE at omega = 0 against joint sampling of value and descriptors.
  const RegionGrid g(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), {4, 3});
  Archive archive(g);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 7; ++i) {
    Observation o;
    o.b = Eigen::Vector2d(u(rng), u(rng));
    o.x = o.b;
    o.y = 0.5 + u(rng);
    archive.offer(o);
  }
  for (const auto& [fm, fs, b0, b1, sd] : std::vector<std::tuple<double, double, double, double, double>>{
           {1.0, 0.5, 0.4, 0.5, 0.2}, {1.4, 0.2, 0.9, 0.1, 0.15}, {0.3, 1.0, 0.5, 0.5, 0.6}}) {
    const Posterior f{fm, fs};
    const std::vector<Posterior> d{{b0, sd}, {b1, sd}};
    double sum = 0, sq = 0, csum = 0, csq = 0;
    long inside = 0;
    for (int i = 0; i < kMcSamples; ++i) {
      const double y = fm + fs * z(rng);
      const Eigen::Vector2d b(b0 + sd * z(rng), b1 + sd * z(rng));
      double v = 0.0;
      if (const auto r = g.flat_index(b)) {
        v = std::max(y - archive.elite_value(*r).value_or(0.0), 0.0);
        ++inside;
        csum += v;
        csq += v * v;
      }
      sum += v;
      sq += v * v;
    }
    const double mean = sum / kMcSamples, se = std::sqrt(std::max(sq / kMcSamples - mean * mean, 0.0) / kMcSamples);
    ok = ok && std::abs(ejie(f, d, archive) - mean) <= kMcSigmas * se + 1e-12;
    const double cm = csum / static_cast<double>(inside);
    const double cse = std::sqrt(std::max(csq / static_cast<double>(inside) - cm * cm, 0.0) / static_cast<double>(inside));
    ok = ok && std::abs(ejie_plus(f, d, archive, 0.0) - cm) <= kMcSigmas * cse + 1e-12;
    cases += 2;
  }
  detail += "; EI/EJIE MC " + std::to_string(cases) + " cases " + (ok ? "ok" : "FAILED");
  return ok;
}

bool region_probability_suite(std::string& detail) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> mu(0.3, 0.7), sd(1e-3, 0.05), wide(0.0, 0.5), off(-0.5, 1.5);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const RegionGrid g(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), {2 + trial % 7, 3 + trial % 5});
    // Concentrated inside the bounds: sums to one.
    std::vector<Posterior> d{{mu(rng), sd(rng)}, {mu(rng), sd(rng)}};
    double total = 0.0;
    for (std::size_t r = 0; r < g.region_count(); ++r) total += region_probability(d, g, r);
    worst = std::max(worst, std::abs(total - 1.0));
    // Anywhere: sums to the in-bounds mass.
    std::vector<Posterior> e{{off(rng), wide(rng)}, {off(rng), wide(rng)}};
    total = 0.0;
    for (std::size_t r = 0; r < g.region_count(); ++r) total += region_probability(e, g, r);
    const double mass = partition_probability(e[0], 0, 1) * partition_probability(e[1], 0, 1);
    worst = std::max(worst, std::abs(total - mass));
  }
  detail += "; region prob max err " + num(worst, 3);
  return worst < 1e-9;
}

bool omega_suite(std::string& detail) {
  bool ok = true;
  for (std::size_t regions : {10u, 100u, 625u, 2500u})
    for (int d : {1, 2, 4, 10}) {
      ok = ok && std::abs(cutoff_omega(0, 0, 10L * d, regions, d) - 1.0 / static_cast<double>(regions)) < 1e-12;
      ok = ok && std::abs(AcquisitionState::initial(regions, d).omega - 1.0 / static_cast<double>(regions)) < 1e-12;
      ok = ok && std::abs(cutoff_omega(0, 0, 1000000000000L, regions, d) - 0.5) < 1e-3;
      double prev = 0.0;
      for (long t = 10L * d; t < 100000; t *= 2) {
        const double w = cutoff_omega(0, 0, t, regions, d);
        ok = ok && w >= prev && w <= 0.5;
        prev = w;
      }
    }
  detail += std::string("; omega ") + (ok ? "ok" : "FAILED");
  return ok;
}

bool archive_fuzz_suite(std::string& detail) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-0.1, 1.1), y(0.0, 10.0);
  std::bernoulli_distribution valid(0.9);
  bool ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    const RegionGrid g(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), {1 + trial % 9, 1 + trial % 6});
    Archive a(g);
    std::vector<double> best(g.region_count(), 0.0);
    double prev = 0.0;
    for (int i = 0; i < 500; ++i) {
      Observation o;
      o.b = Eigen::Vector2d(u(rng), u(rng));
      o.x = o.b;
      o.y = y(rng);
      o.valid = valid(rng);
      a.offer(o);
      if (auto r = g.flat_index(o.b); r && o.valid) best[*r] = std::max(best[*r], o.y);
      ok = ok && a.qd_score() >= prev;
      prev = a.qd_score();
    }
    double total = 0.0;
    for (double b : best) total += b;
    ok = ok && std::abs(total - a.qd_score()) < 1e-9;
  }
  detail += std::string("; archive fuzz ") + (ok ? "ok" : "FAILED");
  return ok;
}

bool determinism_suite(std::string& detail) {
  RunConfig c;
  c.problem_id = "mishra";
  c.mode = DescriptorMode::BlackBox;
  c.resolution = {10, 10};
  c.budget = 40;
  c.seed = 12;
  const Problem p = mishra_problem();
  const RunResult a = run_bop_elites(p, c), b = run_bop_elites(p, c);
  bool ok = a.trace.size() == b.trace.size();
  for (std::size_t i = 0; ok && i < a.trace.size(); ++i)
    ok = a.trace[i].x == b.trace[i].x && a.trace[i].qd_score == b.trace[i].qd_score;
  const auto g = p.grid({10, 10});
  ok = ok && map_elites_run(p, g, 300, {}, 3).archive.qd_score() == map_elites_run(p, g, 300, {}, 3).archive.qd_score();
  detail += std::string("; determinism ") + (ok ? "ok" : "FAILED");
  return ok;
}

Line property_suites() {
  std::string detail;
  bool ok = gp_oracle_suite(detail);
  ok = ei_mc_suite(detail) && ok;
  ok = region_probability_suite(detail) && ok;
  ok = omega_suite(detail) && ok;
  ok = archive_fuzz_suite(detail) && ok;
  ok = determinism_suite(detail) && ok;
  return {"property-suites", ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string cache_dir = "acceptance_cache";
  std::vector<std::string> only;
  bool verbose = false;
  app.add_option("--cache", cache_dir, "Directory for cached benchmark runs");
  app.add_option("--only", only, "Run only these criteria");
  app.add_flag("-v,--verbose", verbose, "Log each run");
  CLI11_PARSE(app, argc, argv);

  Cache cache(cache_dir, verbose);
  const std::vector<std::pair<std::string, std::function<Line()>>> criteria{
      {"properties", [] { return property_suites(); }},
      {"mishra_white", [&] { return mishra_white(cache); }},
      {"robot_arm", [&] { return robot_arm(cache); }},
      {"invalid", [&] { return invalid_region(cache); }},
      {"synthetic", [&] { return synthetic(cache); }},
      {"mishra_black", [&] { return mishra_black(cache); }},
      {"dominance", [&] { return dominance(cache); }},
      {"upscale", [&] { return upscaling(cache); }},
  };
  int failed = 0;
  for (const auto& [key, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), key) == only.end()) continue;
    Line l;
    try {
      l = fn();
    } catch (const std::exception& e) {
      l = {key, false, std::string("error: ") + e.what()};
    }
    failed += !l.pass;
    std::cout << (l.pass ? "PASS " : "FAIL ") << l.id << ": " << l.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
