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
#include "msadet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "msadet/errors.hpp"

namespace msadet {

double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

void PointCloud::validate() const {
  if (coords.empty()) throw std::invalid_argument("point cloud is empty");
  for (const auto& p : coords) {
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2])) {
      throw std::invalid_argument("point cloud has non-finite coordinates");
    }
  }
  if (feats.defined() && (feats.rank() != 2 || feats.shape()[0] != coords.size())) {
    throw DimensionError("point features " + shape_to_string(feats.shape()) + " do not match " +
                         std::to_string(coords.size()) + " points");
  }
}

void WIDConfig::validate() const {
  if (k_neighbors < 1) throw ConfigError("WID k_neighbors must be >= 1");
  if (!(power > 0.0)) throw ConfigError("WID power must be > 0");
  if (!(epsilon > 0.0)) throw ConfigError("WID epsilon must be > 0");
}

std::vector<std::size_t> farthest_point_sample(std::span<const Vec3> points, std::size_t n,
                                               std::size_t seed_index) {
  const std::size_t m = points.size();
  if (n < 1 || n > m) {
    throw std::invalid_argument("farthest_point_sample: cannot pick " + std::to_string(n) + " of " +
                                std::to_string(m) + " points");
  }
  if (seed_index >= m) throw std::invalid_argument("farthest_point_sample: seed index out of range");
  std::vector<std::size_t> picked;
  picked.reserve(n);
  std::vector<double> min_d2(m, std::numeric_limits<double>::infinity());
  std::vector<char> taken(m, 0);
  std::size_t current = seed_index;
  for (std::size_t step = 0; step < n; ++step) {
    picked.push_back(current);
    taken[current] = 1;
    const Vec3& c = points[current];
    std::size_t best = m;
    double best_d2 = -1.0;
    for (std::size_t i = 0; i < m; ++i) {
      min_d2[i] = std::min(min_d2[i], squared_distance(points[i], c));
      if (!taken[i] && min_d2[i] > best_d2) {
        best_d2 = min_d2[i];
        best = i;
      }
    }
    current = best;
  }
  return picked;
}

std::size_t lexicographic_min_index(std::span<const Vec3> points) {
  if (points.empty()) throw std::invalid_argument("lexicographic_min_index: no points");
  std::size_t best = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i] < points[best]) best = i;
  }
  return best;
}

KnnResult knn(std::span<const Vec3> queries, std::span<const Vec3> data, std::size_t k) {
  if (k < 1 || k > data.size()) {
    throw std::invalid_argument("knn: k=" + std::to_string(k) + " with " + std::to_string(data.size()) +
                                " data points");
  }
  KnnResult out;
  out.k = k;
  out.indices.resize(queries.size() * k);
  out.distances.resize(queries.size() * k);
  std::vector<std::pair<double, std::size_t>> cand(data.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    for (std::size_t i = 0; i < data.size(); ++i) cand[i] = {squared_distance(queries[q], data[i]), i};
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    for (std::size_t j = 0; j < k; ++j) {
      out.indices[q * k + j] = cand[j].second;
      out.distances[q * k + j] = std::sqrt(cand[j].first);
    }
  }
  return out;
}

InterpolationWeights wid_weights(std::span<const Vec3> queries, std::span<const Vec3> sources,
                                 const WIDConfig& cfg) {
  cfg.validate();
  KnnResult nn = knn(queries, sources, cfg.k_neighbors);
  const std::size_t k = nn.k;
  InterpolationWeights w;
  w.k = k;
  w.indices = std::move(nn.indices);
  w.weights.assign(queries.size() * k, 0.0);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const double* d = nn.distances.data() + q * k;
    double* out = w.weights.data() + q * k;
    if (d[0] < cfg.epsilon) {
      out[0] = 1.0;
      continue;
    }
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      out[j] = 1.0 / std::pow(d[j], cfg.power);
      total += out[j];
    }
    for (std::size_t j = 0; j < k; ++j) out[j] /= total;
  }
  return w;
}

Tensor wid_interpolate(const InterpolationWeights& weights, const Tensor& source_feats) {
  return weighted_gather(source_feats, weights.indices, weights.weights, weights.k);
}

Tensor wid_interpolate(std::span<const Vec3> queries, std::span<const Vec3> sources,
                       const Tensor& source_feats, const WIDConfig& cfg) {
  if (!source_feats.defined() || source_feats.rank() != 2 || source_feats.shape()[0] != sources.size()) {
    throw DimensionError("wid_interpolate: features " +
                         (source_feats.defined() ? shape_to_string(source_feats.shape()) : std::string("[]")) +
                         " do not match " + std::to_string(sources.size()) + " sources");
  }
  return wid_interpolate(wid_weights(queries, sources, cfg), source_feats);
}

BallGroups ball_query(std::span<const Vec3> data, std::span<const std::size_t> centers, double radius,
                      std::size_t cap) {
  if (cap < 1) throw std::invalid_argument("ball_query: cap must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("ball_query: radius must be > 0");
  BallGroups g;
  g.cap = cap;
  g.indices.reserve(centers.size() * cap);
  g.counts.reserve(centers.size());
  const double r2 = radius * radius;
  std::vector<std::pair<double, std::size_t>> inside;
  for (std::size_t c : centers) {
    if (c >= data.size()) throw std::out_of_range("ball_query: centre index out of range");
    inside.clear();
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (i == c) continue;
      const double d2 = squared_distance(data[i], data[c]);
      if (d2 <= r2) inside.emplace_back(d2, i);
    }
    const std::size_t take = std::min(cap - 1, inside.size());
    auto closer = [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      if (data[a.second] != data[b.second]) return data[a.second] < data[b.second];
      return a.second < b.second;
    };
    std::partial_sort(inside.begin(), inside.begin() + static_cast<std::ptrdiff_t>(take), inside.end(), closer);
    g.indices.push_back(c);
    for (std::size_t j = 0; j < take; ++j) g.indices.push_back(inside[j].second);
    for (std::size_t j = take + 1; j < cap; ++j) g.indices.push_back(c);
    g.counts.push_back(take + 1);
  }
  return g;
}

Tensor upsample_features(std::span<const Vec3> encoder_points, const Tensor& encoder_feats,
                         std::span<const Vec3> dense_points, const MlpParams& proj, const WIDConfig& cfg) {
  if (dense_points.size() < encoder_points.size()) {
    throw std::invalid_argument("upsample_features: " + std::to_string(dense_points.size()) +
                                " dense points is fewer than " + std::to_string(encoder_points.size()) +
                                " encoder points");
  }
  return apply(proj, wid_interpolate(dense_points, encoder_points, encoder_feats, cfg));
}

std::vector<Vec3> gather_points(std::span<const Vec3> points, std::span<const std::size_t> indices) {
  std::vector<Vec3> out;
  out.reserve(indices.size());
  for (auto i : indices) {
    if (i >= points.size()) throw std::out_of_range("gather_points: index " + std::to_string(i) + " out of range");
    out.push_back(points[i]);
  }
  return out;
}

}  // namespace msadet
