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

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bope {

class Problem;

struct RegionIndex {
  std::size_t flat = 0;
  std::vector<int> multi;
};

/// Uniform partition of a box in descriptor space into prod(N_i) regions.
///
/// A value on an interior boundary belongs to the upper partition; a value at
/// the global upper bound belongs to the last partition. Flat indices are
/// row-major over the multi-index (first descriptor most significant).
class RegionGrid {
 public:
  RegionGrid() = default;
  RegionGrid(Eigen::VectorXd lower, Eigen::VectorXd upper, std::vector<int> partitions);

  int dims() const { return static_cast<int>(partitions_.size()); }
  std::size_t region_count() const { return region_count_; }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  const std::vector<int>& partitions() const { return partitions_; }

  /// Lower edge of partition k in dimension j (k may equal N_j for the top edge).
  double edge(int j, int k) const;
  double width(int j) const { return (upper_[j] - lower_[j]) / partitions_[static_cast<std::size_t>(j)]; }

  /// Partition of `value` along dimension j, or -1 if outside the bounds.
  int partition_of(int j, double value) const;

  std::optional<RegionIndex> region_index(const Eigen::VectorXd& b) const;
  std::optional<std::size_t> flat_index(const Eigen::VectorXd& b) const;

  std::size_t flatten(const std::vector<int>& multi) const;
  std::vector<int> unflatten(std::size_t flat) const;

  /// Box of one region as (lower corner, upper corner).
  std::pair<Eigen::VectorXd, Eigen::VectorXd> region_box(std::size_t flat) const;

  /// Same bounds, different resolution.
  RegionGrid with_partitions(std::vector<int> partitions) const;

  std::string describe_multi(std::size_t flat) const;

 private:
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  std::vector<int> partitions_;
  std::vector<std::size_t> strides_;
  std::size_t region_count_ = 0;
};

/// One evaluated point. `x` is in the problem's natural coordinates. Invalid
/// observations carry no meaningful y or b.
struct Observation {
  Eigen::VectorXd x;
  double y = 0.0;
  Eigen::VectorXd b;
  bool valid = true;
  long iteration = 0;
};

/// Structured elite archive with the full evaluation history.
class Archive {
 public:
  Archive() = default;
  explicit Archive(RegionGrid grid);

  /// Appends to the history; stores as the region's elite iff the observation
  /// is valid, its descriptor is in bounds, and the region is empty or the new
  /// y is strictly greater. Returns whether it became an elite.
  bool offer(const Observation& obs);

  /// Sum of elite values; empty regions contribute 0.
  double qd_score() const;

  const RegionGrid& grid() const { return grid_; }
  const std::vector<Observation>& history() const { return history_; }
  const Observation* elite(std::size_t region) const;
  std::optional<double> elite_value(std::size_t region) const;
  std::size_t filled_count() const;

  /// Replays the history onto another grid.
  Archive rebinned(RegionGrid grid) const;

 private:
  RegionGrid grid_;
  std::vector<Observation> history_;
  std::vector<std::optional<std::size_t>> elites_;
  std::vector<double> elite_values_;
};

double qd_score(const Archive& archive);

struct PredictedScore {
  double total = 0.0;
  // Per-region true value when the proposal lands in its own region, else 0.
  std::vector<double> contributions;
  // True objective value regardless of landing region (NaN for empty slots or
  // invalid evaluations).
  std::vector<double> true_values;
  std::vector<bool> landed;
};

/// Evaluates one proposal per region on the true problem and sums f over the
/// proposals whose true descriptor lands in their assigned region.
PredictedScore predicted_qd_score(const Problem& problem, const RegionGrid& grid,
                                  const std::vector<std::optional<Eigen::VectorXd>>& proposals);

}  // namespace bope
