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

#include "bopelites/archive.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "bopelites/problem.hpp"

namespace bope {

RegionGrid::RegionGrid(Eigen::VectorXd lower, Eigen::VectorXd upper, std::vector<int> partitions)
    : lower_(std::move(lower)), upper_(std::move(upper)), partitions_(std::move(partitions)) {
  if (partitions_.empty()) throw std::invalid_argument("RegionGrid: need at least one descriptor dimension");
  if (lower_.size() != static_cast<Eigen::Index>(partitions_.size()) || upper_.size() != lower_.size())
    throw std::invalid_argument("RegionGrid: bounds and partitions disagree in dimension");
  strides_.assign(partitions_.size(), 1);
  region_count_ = 1;
  for (std::size_t j = partitions_.size(); j-- > 0;) {
    if (partitions_[j] < 1) throw std::invalid_argument("RegionGrid: partition counts must be positive");
    const auto jj = static_cast<Eigen::Index>(j);
    if (!(lower_[jj] < upper_[jj]) || !std::isfinite(lower_[jj]) || !std::isfinite(upper_[jj]))
      throw std::invalid_argument("RegionGrid: need finite low < high in every dimension");
    strides_[j] = region_count_;
    region_count_ *= static_cast<std::size_t>(partitions_[j]);
  }
}

double RegionGrid::edge(int j, int k) const {
  const int n = partitions_[static_cast<std::size_t>(j)];
  if (k >= n) return upper_[j];
  return lower_[j] + (upper_[j] - lower_[j]) * static_cast<double>(k) / static_cast<double>(n);
}

int RegionGrid::partition_of(int j, double value) const {
  if (!(value >= lower_[j]) || !(value <= upper_[j])) return -1;
  const int n = partitions_[static_cast<std::size_t>(j)];
  int k = static_cast<int>(std::floor((value - lower_[j]) / (upper_[j] - lower_[j]) * n));
  k = std::clamp(k, 0, n - 1);
  // Align with edge() so that region boxes and indices agree exactly.
  while (k < n - 1 && value >= edge(j, k + 1)) ++k;
  while (k > 0 && value < edge(j, k)) --k;
  return k;
}

std::optional<RegionIndex> RegionGrid::region_index(const Eigen::VectorXd& b) const {
  if (b.size() != dims()) return std::nullopt;
  RegionIndex idx;
  idx.multi.resize(partitions_.size());
  for (int j = 0; j < dims(); ++j) {
    const int k = partition_of(j, b[j]);
    if (k < 0) return std::nullopt;
    idx.multi[static_cast<std::size_t>(j)] = k;
    idx.flat += static_cast<std::size_t>(k) * strides_[static_cast<std::size_t>(j)];
  }
  return idx;
}

std::optional<std::size_t> RegionGrid::flat_index(const Eigen::VectorXd& b) const {
  if (b.size() != dims()) return std::nullopt;
  std::size_t flat = 0;
  for (int j = 0; j < dims(); ++j) {
    const int k = partition_of(j, b[j]);
    if (k < 0) return std::nullopt;
    flat += static_cast<std::size_t>(k) * strides_[static_cast<std::size_t>(j)];
  }
  return flat;
}

std::size_t RegionGrid::flatten(const std::vector<int>& multi) const {
  if (multi.size() != partitions_.size()) throw std::invalid_argument("RegionGrid::flatten: dimension mismatch");
  std::size_t flat = 0;
  for (std::size_t j = 0; j < multi.size(); ++j) {
    if (multi[j] < 0 || multi[j] >= partitions_[j]) throw std::out_of_range("RegionGrid::flatten: index out of range");
    flat += static_cast<std::size_t>(multi[j]) * strides_[j];
  }
  return flat;
}

std::vector<int> RegionGrid::unflatten(std::size_t flat) const {
  if (flat >= region_count_) throw std::out_of_range("RegionGrid::unflatten: index out of range");
  std::vector<int> multi(partitions_.size());
  for (std::size_t j = 0; j < partitions_.size(); ++j) {
    multi[j] = static_cast<int>(flat / strides_[j]);
    flat %= strides_[j];
  }
  return multi;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> RegionGrid::region_box(std::size_t flat) const {
  const auto multi = unflatten(flat);
  Eigen::VectorXd lo(dims()), hi(dims());
  for (int j = 0; j < dims(); ++j) {
    lo[j] = edge(j, multi[static_cast<std::size_t>(j)]);
    hi[j] = edge(j, multi[static_cast<std::size_t>(j)] + 1);
  }
  return {lo, hi};
}

RegionGrid RegionGrid::with_partitions(std::vector<int> partitions) const {
  return RegionGrid(lower_, upper_, std::move(partitions));
}

std::string RegionGrid::describe_multi(std::size_t flat) const {
  const auto multi = unflatten(flat);
  std::ostringstream os;
  for (std::size_t j = 0; j < multi.size(); ++j) os << (j ? ";" : "") << multi[j];
  return os.str();
}

Archive::Archive(RegionGrid grid)
    : grid_(std::move(grid)),
      elites_(grid_.region_count()),
      elite_values_(grid_.region_count(), std::numeric_limits<double>::quiet_NaN()) {}

bool Archive::offer(const Observation& obs) {
  history_.push_back(obs);
  if (!obs.valid || !std::isfinite(obs.y)) return false;
  const auto region = grid_.flat_index(obs.b);
  if (!region) return false;
  auto& slot = elites_[*region];
  if (slot && !(obs.y > elite_values_[*region])) return false;
  slot = history_.size() - 1;
  elite_values_[*region] = obs.y;
  return true;
}

double Archive::qd_score() const {
  double total = 0.0;
  for (std::size_t r = 0; r < elites_.size(); ++r)
    if (elites_[r]) total += elite_values_[r];
  return total;
}

const Observation* Archive::elite(std::size_t region) const {
  const auto& slot = elites_.at(region);
  return slot ? &history_[*slot] : nullptr;
}

std::optional<double> Archive::elite_value(std::size_t region) const {
  if (!elites_[region]) return std::nullopt;
  return elite_values_[region];
}

std::size_t Archive::filled_count() const {
  std::size_t n = 0;
  for (const auto& e : elites_) n += e.has_value();
  return n;
}

Archive Archive::rebinned(RegionGrid grid) const {
  Archive out(std::move(grid));
  for (const auto& obs : history_) out.offer(obs);
  return out;
}

double qd_score(const Archive& archive) { return archive.qd_score(); }

PredictedScore predicted_qd_score(const Problem& problem, const RegionGrid& grid,
                                  const std::vector<std::optional<Eigen::VectorXd>>& proposals) {
  if (proposals.size() != grid.region_count())
    throw std::invalid_argument("predicted_qd_score: need one proposal slot per region");
  PredictedScore out;
  out.contributions.assign(proposals.size(), 0.0);
  out.true_values.assign(proposals.size(), std::numeric_limits<double>::quiet_NaN());
  out.landed.assign(proposals.size(), false);
  for (std::size_t r = 0; r < proposals.size(); ++r) {
    if (!proposals[r]) continue;
    const Evaluation e = problem.evaluate(*proposals[r]);
    if (!e.valid) continue;
    out.true_values[r] = e.y;
    const auto region = grid.flat_index(e.b);
    if (region && *region == r) {
      out.landed[r] = true;
      out.contributions[r] = e.y;
      out.total += e.y;
    }
  }
  return out;
}

}  // namespace bope
