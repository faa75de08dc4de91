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

#include "bopelites/sobol.hpp"

#include <random>
#include <stdexcept>

namespace bope {

ScrambledSobol::ScrambledSobol(int dim, std::uint64_t seed)
    : dim_(dim), engine_(static_cast<std::size_t>(dim)), shift_(static_cast<std::size_t>(dim)) {
  if (dim <= 0) throw std::invalid_argument("ScrambledSobol: dimension must be positive");
  std::mt19937_64 rng(seed);
  for (auto& s : shift_) s = rng();
}

Eigen::VectorXd ScrambledSobol::next() {
  constexpr double kScale = 1.0 / 18446744073709551616.0;  // 2^-64
  Eigen::VectorXd x(dim_);
  for (int k = 0; k < dim_; ++k) {
    const std::uint64_t raw = emitted_ == 0 ? 0 : static_cast<std::uint64_t>(engine_());
    const std::uint64_t v = raw ^ shift_[static_cast<std::size_t>(k)];
    // Keep 53 significant bits so the result is strictly below 1.
    x[k] = static_cast<double>(v >> 11) * (kScale * 2048.0);
  }
  ++emitted_;
  return x;
}

Eigen::MatrixXd ScrambledSobol::draw(Eigen::Index count) {
  Eigen::MatrixXd out(count, dim_);
  for (Eigen::Index i = 0; i < count; ++i) out.row(i) = next().transpose();
  return out;
}

}  // namespace bope
