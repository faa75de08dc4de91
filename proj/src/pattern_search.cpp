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

#include "bopelites/pattern_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bope {

namespace {

double sanitize(double v) { return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v; }

struct SearchState {
  Eigen::VectorXd x;
  double value = -std::numeric_limits<double>::infinity();
  double step = 0.0;
  int generations = 0;
  long evaluations = 0;
  bool done = false;
  // Poll rows owned by this search in the current batch: [first, first + count).
  Eigen::Index first = 0;
  Eigen::Index count = 0;
};

}  // namespace

void PatternSearchConfig::validate() const {
  if (!(initial_step > 0.0)) throw std::invalid_argument("pattern search: initial_step must be positive");
  if (!(contraction_factor > 0.0 && contraction_factor < 1.0))
    throw std::invalid_argument("pattern search: contraction_factor must lie in (0,1)");
  if (max_generations < 0 || max_generations > 100)
    throw std::invalid_argument("pattern search: max_generations must lie in [0,100]");
  if (max_evals_per_generation < 1 || max_evals_per_generation > 1500)
    throw std::invalid_argument("pattern search: max_evals_per_generation must lie in [1,1500]");
  if (!(min_step > 0.0)) throw std::invalid_argument("pattern search: min_step must be positive");
}

std::vector<PatternSearchResult> pattern_search_batch(const OwnedBatchObjective& f,
                                                      const Eigen::MatrixXd& starts,
                                                      const PatternSearchConfig& config,
                                                      const Eigen::VectorXd& lower,
                                                      const Eigen::VectorXd& upper) {
  config.validate();
  const Eigen::Index d = starts.cols();
  if (lower.size() != d || upper.size() != d)
    throw std::invalid_argument("pattern search: bounds dimension mismatch");

  std::vector<SearchState> states(static_cast<std::size_t>(starts.rows()));
  {
    Eigen::MatrixXd clamped = starts;
    for (Eigen::Index i = 0; i < clamped.rows(); ++i)
      clamped.row(i) = clamped.row(i).cwiseMax(lower.transpose()).cwiseMin(upper.transpose());
    std::vector<Eigen::Index> owners(static_cast<std::size_t>(clamped.rows()));
    for (std::size_t i = 0; i < owners.size(); ++i) owners[i] = static_cast<Eigen::Index>(i);
    const Eigen::VectorXd v = clamped.rows() > 0 ? f(clamped, owners) : Eigen::VectorXd();
    for (std::size_t i = 0; i < states.size(); ++i) {
      auto& s = states[i];
      s.x = clamped.row(static_cast<Eigen::Index>(i)).transpose();
      s.value = sanitize(v[static_cast<Eigen::Index>(i)]);
      s.step = config.initial_step;
      s.evaluations = 1;
      s.done = config.max_generations == 0 || s.step < config.min_step;
    }
  }

  const Eigen::Index polls_per_search = std::min<Eigen::Index>(2 * d, config.max_evals_per_generation);
  Eigen::MatrixXd polls;
  std::vector<Eigen::Index> owners;
  while (true) {
    Eigen::Index total = 0;
    for (auto& s : states) {
      s.count = 0;
      if (s.done) continue;
      s.first = total;
      s.count = polls_per_search;
      total += polls_per_search;
    }
    if (total == 0) break;

    polls.resize(total, d);
    owners.resize(static_cast<std::size_t>(total));
    for (std::size_t i = 0; i < states.size(); ++i) {
      auto& s = states[i];
      if (s.count == 0) continue;
      std::fill_n(owners.begin() + s.first, s.count, static_cast<Eigen::Index>(i));
      for (Eigen::Index p = 0; p < s.count; ++p) {
        const Eigen::Index axis = p / 2;
        const double sign = (p % 2 == 0) ? 1.0 : -1.0;
        Eigen::VectorXd y = s.x;
        y[axis] = std::clamp(y[axis] + sign * s.step, lower[axis], upper[axis]);
        polls.row(s.first + p) = y.transpose();
      }
    }
    const Eigen::VectorXd values = f(polls, owners);

    for (auto& s : states) {
      if (s.count == 0) continue;
      Eigen::Index best = -1;
      double best_value = s.value;
      for (Eigen::Index p = 0; p < s.count; ++p) {
        const double v = sanitize(values[s.first + p]);
        if (v > best_value) {
          best_value = v;
          best = p;
        }
      }
      s.evaluations += s.count;
      ++s.generations;
      if (best >= 0) {
        s.x = polls.row(s.first + best).transpose();
        s.value = best_value;
      } else {
        s.step *= config.contraction_factor;
      }
      if (s.step < config.min_step || s.generations >= config.max_generations) s.done = true;
    }
  }

  std::vector<PatternSearchResult> out;
  out.reserve(states.size());
  for (const auto& s : states)
    out.push_back(PatternSearchResult{s.x, s.value, s.generations, s.evaluations, s.step});
  return out;
}

std::vector<PatternSearchResult> pattern_search_batch(const BatchObjective& f,
                                                      const Eigen::MatrixXd& starts,
                                                      const PatternSearchConfig& config,
                                                      const Eigen::VectorXd& lower,
                                                      const Eigen::VectorXd& upper) {
  const OwnedBatchObjective owned = [&f](const Eigen::MatrixXd& pts, const std::vector<Eigen::Index>&) {
    return f(pts);
  };
  return pattern_search_batch(owned, starts, config, lower, upper);
}

std::vector<PatternSearchResult> pattern_search_batch(const OwnedBatchObjective& f,
                                                      const Eigen::MatrixXd& starts,
                                                      const PatternSearchConfig& config) {
  const Eigen::Index d = starts.cols();
  return pattern_search_batch(f, starts, config, Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d));
}

std::vector<PatternSearchResult> pattern_search_batch(const BatchObjective& f,
                                                      const Eigen::MatrixXd& starts,
                                                      const PatternSearchConfig& config) {
  const Eigen::Index d = starts.cols();
  return pattern_search_batch(f, starts, config, Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d));
}

PatternSearchResult pattern_search(const PointObjective& f, const Eigen::VectorXd& start,
                                   const PatternSearchConfig& config, const Eigen::VectorXd& lower,
                                   const Eigen::VectorXd& upper) {
  const BatchObjective batch = [&f](const Eigen::MatrixXd& pts) {
    Eigen::VectorXd v(pts.rows());
    for (Eigen::Index i = 0; i < pts.rows(); ++i) v[i] = f(pts.row(i).transpose());
    return v;
  };
  return pattern_search_batch(batch, start.transpose(), config, lower, upper).front();
}

PatternSearchResult pattern_search(const PointObjective& f, const Eigen::VectorXd& start,
                                   const PatternSearchConfig& config) {
  const Eigen::Index d = start.size();
  return pattern_search(f, start, config, Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d));
}

}  // namespace bope
