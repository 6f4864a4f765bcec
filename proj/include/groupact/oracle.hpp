// Copyright 2026 The groupact Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Slow reference implementations used to check the fast paths. Nothing here
// shares code with the routine it checks.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "groupact/assignment.hpp"

namespace groupact::oracle {

/// Central differences, one coordinate at a time.
inline Eigen::VectorXd finite_difference_grad(const std::function<double(const Eigen::VectorXd&)>& f,
                                              const Eigen::VectorXd& x, double h = 1e-5) {
  if (!(h > 0)) throw std::invalid_argument("finite_difference_grad: step must be positive");
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down))
      throw std::domain_error("finite_difference_grad: non-finite function value");
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

/// Exhaustive maximum-weight injective mapping. Enumerates the smaller side
/// into the larger; only positive weights count. Throws std::length_error
/// when the smaller side exceeds six.
inline Assignment brute_force_assignment(const WeightMatrix& w) {
  const int rows = static_cast<int>(w.size());
  const int cols = rows ? static_cast<int>(w[0].size()) : 0;
  if (std::min(rows, cols) > 6) throw std::length_error("brute_force_assignment: problem too large");
  const bool by_rows = rows <= cols;
  const int small = by_rows ? rows : cols;
  const int large = by_rows ? cols : rows;
  auto weight = [&](int s, int l) {
    const std::int64_t v = by_rows ? w[s][l] : w[l][s];
    return v > 0 ? v : 0;
  };

  std::vector<int> pick(small, -1), best(small, -1);
  std::vector<char> used(large, 0);
  std::int64_t best_value = -1;
  std::function<void(int, std::int64_t)> rec = [&](int s, std::int64_t value) {
    if (s == small) {
      if (value > best_value) {
        best_value = value;
        best = pick;
      }
      return;
    }
    for (int l = 0; l < large; ++l) {
      if (used[l] || weight(s, l) == 0) continue;
      used[l] = 1;
      pick[s] = l;
      rec(s + 1, value + weight(s, l));
      used[l] = 0;
    }
    pick[s] = -1;
    rec(s + 1, value);
  };
  rec(0, 0);

  Assignment out;
  out.value = std::max<std::int64_t>(best_value, 0);
  out.row_to_col.assign(rows, -1);
  for (int s = 0; s < small; ++s) {
    if (best[s] < 0) continue;
    if (by_rows) out.row_to_col[s] = best[s];
    else out.row_to_col[best[s]] = s;
  }
  return out;
}

}  // namespace groupact::oracle
