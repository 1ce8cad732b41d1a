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
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace msadet {

struct MatchResult {
  /// Per query: the assigned ground-truth index, or nullopt for "no object".
  std::vector<std::optional<std::size_t>> assignment;
  double total_cost = 0.0;
};

/// Minimum-cost assignment of every ground-truth column to a distinct query
/// row. `cost` is row-major n_queries x n_gt; requires n_queries >= n_gt.
MatchResult hungarian_match(const std::vector<double>& cost, std::size_t n_queries, std::size_t n_gt);

}  // namespace msadet
