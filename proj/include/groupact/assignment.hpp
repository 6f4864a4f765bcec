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

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace groupact {

using WeightMatrix = std::vector<std::vector<std::int64_t>>;  ///< rows x cols, row-major

struct Assignment {
  std::vector<int> row_to_col;  ///< -1 when unassigned
  std::int64_t value = 0;
};

namespace detail {

// Kuhn-Munkres with potentials on a square cost matrix (minimization),
// O(n^3). Returns the column of each row.
inline std::vector<int> hungarian_min(const std::vector<std::vector<std::int64_t>>& cost) {
  const int n = static_cast<int>(cost.size());
  constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<std::int64_t> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      std::int64_t delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const std::int64_t cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

// Optimal total over the given rows/cols of `w`; nonpositive pairs never help.
inline std::int64_t optimum(const WeightMatrix& w, const std::vector<int>& rows, const std::vector<int>& cols) {
  if (rows.empty() || cols.empty()) return 0;
  const int n = static_cast<int>(std::max(rows.size(), cols.size()));
  std::vector<std::vector<std::int64_t>> cost(n, std::vector<std::int64_t>(n, 0));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      cost[r][c] = -std::max<std::int64_t>(0, w[rows[r]][cols[c]]);
  const auto sol = hungarian_min(cost);
  std::int64_t total = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) total -= cost[r][sol[r]];
  return total;
}

}  // namespace detail

/// Maximum-weight one-to-one assignment. Only positive-weight pairs are kept.
/// Among optimal assignments the lexicographically first one is returned:
/// each row, in order, takes the smallest column that still allows the
/// optimum. The problem is split into connected components of the
/// positive-weight bipartite graph, which keeps the tie-breaking cheap.
inline Assignment max_weight_assignment(const WeightMatrix& w) {
  const int rows = static_cast<int>(w.size());
  const int cols = rows ? static_cast<int>(w[0].size()) : 0;
  Assignment out;
  out.row_to_col.assign(rows, -1);

  // Components over rows (ids 0..rows-1) and cols (rows..rows+cols-1).
  std::vector<int> parent(rows + cols);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (w[r][c] > 0) parent[find(r)] = find(rows + c);

  std::vector<std::vector<int>> comp_rows(rows + cols), comp_cols(rows + cols);
  for (int r = 0; r < rows; ++r) comp_rows[find(r)].push_back(r);
  for (int c = 0; c < cols; ++c) comp_cols[find(rows + c)].push_back(c);

  for (int root = 0; root < rows + cols; ++root) {
    auto rs = comp_rows[root];
    auto cs = comp_cols[root];
    if (rs.empty() || cs.empty()) continue;
    std::int64_t target = detail::optimum(w, rs, cs);
    out.value += target;
    // Fix rows one at a time, smallest feasible column first.
    while (!rs.empty() && target > 0) {
      const int r = rs.front();
      rs.erase(rs.begin());
      for (std::size_t ci = 0; ci < cs.size(); ++ci) {
        const int c = cs[ci];
        if (w[r][c] <= 0) continue;
        auto rest_cols = cs;
        rest_cols.erase(rest_cols.begin() + static_cast<std::ptrdiff_t>(ci));
        const std::int64_t rest = detail::optimum(w, rs, rest_cols);
        if (w[r][c] + rest == target) {
          out.row_to_col[r] = c;
          cs = std::move(rest_cols);
          target = rest;
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace groupact
