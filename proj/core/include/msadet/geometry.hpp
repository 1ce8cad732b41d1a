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
// Point sampling, neighbour search and inverse-distance feature upsampling.

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "msadet/nn.hpp"
#include "msadet/tensor.hpp"

namespace msadet {

using Vec3 = std::array<double, 3>;

double squared_distance(const Vec3& a, const Vec3& b);

struct PointCloud {
  std::vector<Vec3> coords;
  Tensor feats;  // optional, M x C

  /// Throws if empty, non-finite, or feats has the wrong leading extent.
  void validate() const;
};

struct WIDConfig {
  std::size_t k_neighbors = 3;
  double power = 2.0;
  /// A nearest distance below this copies the neighbour's features verbatim.
  double epsilon = 1e-8;

  void validate() const;
};

/// Greedy farthest point sampling. The first pick is `seed_index`; each later
/// pick maximises the distance to the picked set, ties to the lowest index.
std::vector<std::size_t> farthest_point_sample(std::span<const Vec3> points, std::size_t n,
                                               std::size_t seed_index = 0);

/// Index of the lexicographically smallest point (x, then y, then z), lowest
/// index on exact duplicates. Used as a permutation-independent FPS seed.
std::size_t lexicographic_min_index(std::span<const Vec3> points);

struct KnnResult {
  std::size_t k = 0;
  std::vector<std::size_t> indices;  // Q x k, row-major
  std::vector<double> distances;     // Q x k, ascending per row
};

/// Exact k nearest neighbours by Euclidean distance, ties to the lowest index.
KnnResult knn(std::span<const Vec3> queries, std::span<const Vec3> data, std::size_t k);

struct InterpolationWeights {
  std::size_t k = 0;
  std::vector<std::size_t> indices;  // Q x k
  std::vector<double> weights;       // Q x k, each row sums to 1
};

/// Normalised inverse-distance weights w_i ∝ 1 / dist_i^power over the k
/// nearest sources, or a one-hot on the nearest source when it lies within
/// epsilon of the query.
InterpolationWeights wid_weights(std::span<const Vec3> queries, std::span<const Vec3> sources,
                                 const WIDConfig& cfg);

/// Interpolates per-source feature rows onto the queries. Differentiable with
/// respect to `source_feats`; the weights are constants of the geometry.
Tensor wid_interpolate(std::span<const Vec3> queries, std::span<const Vec3> sources,
                       const Tensor& source_feats, const WIDConfig& cfg);
Tensor wid_interpolate(const InterpolationWeights& weights, const Tensor& source_feats);

struct BallGroups {
  std::size_t cap = 0;
  std::vector<std::size_t> indices;  // G x cap, padded by repeating the centre
  std::vector<std::size_t> counts;   // real members per group
};

/// For each centre (an index into `data`), the data points within `radius`,
/// nearest first, capped at `cap`. Distance ties are ordered by coordinates so
/// membership does not depend on input order. The centre is always first.
BallGroups ball_query(std::span<const Vec3> data, std::span<const std::size_t> centers,
                      double radius, std::size_t cap);

/// Interpolates encoder features onto the dense point set, then projects them
/// with `proj` (linear -> relu -> linear).
Tensor upsample_features(std::span<const Vec3> encoder_points, const Tensor& encoder_feats,
                         std::span<const Vec3> dense_points, const MlpParams& proj,
                         const WIDConfig& cfg);

std::vector<Vec3> gather_points(std::span<const Vec3> points, std::span<const std::size_t> indices);

}  // namespace msadet
