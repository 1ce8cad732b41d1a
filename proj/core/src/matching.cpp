// Copyright 2026 The msadet Authors
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
#include "msadet/matching.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace msadet {

// Shortest augmenting path with potentials, O(G^2 Q). Ground-truth boxes are
// the rows being assigned; queries are the (more numerous) columns.
MatchResult hungarian_match(const std::vector<double>& cost, std::size_t n_queries, std::size_t n_gt) {
  if (n_queries < n_gt) {
    throw std::invalid_argument("hungarian_match: " + std::to_string(n_gt) + " ground-truth boxes but only " +
                                std::to_string(n_queries) + " queries");
  }
  if (cost.size() != n_queries * n_gt) throw std::invalid_argument("hungarian_match: cost matrix size mismatch");
  for (double x : cost) {
    if (!std::isfinite(x)) throw std::invalid_argument("hungarian_match: non-finite cost");
  }
  MatchResult result;
  result.assignment.assign(n_queries, std::nullopt);
  if (n_gt == 0) return result;

  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = n_gt, m = n_queries;
  auto c = [&](std::size_t gt, std::size_t q) { return cost[q * n_gt + gt]; };
  // 1-based arrays; index 0 is a sentinel.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> owner(m + 1, 0), way(m + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    owner[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[col0] = 1;
      const std::size_t row0 = owner[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= m; ++col) {
        if (used[col]) continue;
        const double cur = c(row0 - 1, col - 1) - u[row0] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (std::size_t col = 0; col <= m; ++col) {
        if (used[col]) {
          u[owner[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (owner[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      owner[col0] = owner[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  for (std::size_t col = 1; col <= m; ++col) {
    if (owner[col] != 0) {
      result.assignment[col - 1] = owner[col] - 1;
      result.total_cost += c(owner[col] - 1, col - 1);
    }
  }
  return result;
}

}  // namespace msadet
