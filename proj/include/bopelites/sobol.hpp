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
#include <vector>

#include <Eigen/Dense>
#include <boost/random/sobol.hpp>

namespace bope {

/// Sobol sequence on [0,1)^d randomised with a seeded digital shift.
///
/// The shift is an XOR of each 64-bit coordinate with a per-dimension random
/// word, which preserves the (t,s)-net structure of the underlying sequence.
class ScrambledSobol {
 public:
  ScrambledSobol(int dim, std::uint64_t seed);

  int dim() const { return dim_; }

  Eigen::VectorXd next();

  /// Returns the next `count` points as rows.
  Eigen::MatrixXd draw(Eigen::Index count);

 private:
  int dim_;
  boost::random::sobol engine_;
  std::vector<std::uint64_t> shift_;
  // The engine starts at index 1; the origin is emitted first by hand.
  std::uint64_t emitted_ = 0;
};

}  // namespace bope
