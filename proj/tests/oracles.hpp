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
// Deliberately naive reference implementations used by the tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "msadet/geometry.hpp"
#include "msadet/tensor.hpp"
#include "msadet/types.hpp"

namespace msadet::testing {

inline std::vector<Vec3> random_cloud(std::size_t n, std::mt19937_64& rng, double extent = 1.0) {
  std::uniform_real_distribution<double> u(-extent, extent);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  return pts;
}

inline double dist(const Vec3& a, const Vec3& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

inline std::vector<double> naive_matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += a(i, t) * b(t, j);
      out[i * n + j] = s;
    }
  return out;
}

// Greedy FPS recomputing every distance to the picked set from scratch.
inline std::vector<std::size_t> naive_fps(std::span<const Vec3> pts, std::size_t n, std::size_t seed) {
  std::vector<std::size_t> picked{seed};
  while (picked.size() < n) {
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (std::find(picked.begin(), picked.end(), i) != picked.end()) continue;
      double d = std::numeric_limits<double>::infinity();
      for (auto j : picked) d = std::min(d, squared_distance(pts[i], pts[j]));
      if (d > best) {
        best = d;
        arg = i;
      }
    }
    picked.push_back(arg);
  }
  return picked;
}

// Full sort by (squared distance, index).
inline std::vector<std::size_t> naive_knn(const Vec3& q, std::span<const Vec3> data, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < data.size(); ++i) all.emplace_back(squared_distance(q, data[i]), i);
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(all[i].second);
  return out;
}

// Direct formula: f(q) = sum_i w_i f_i / sum_i w_i, w_i = 1 / d_i^p.
inline std::vector<double> naive_wid(const Vec3& q, std::span<const Vec3> src, const Tensor& feats, std::size_t k,
                                     double power, double eps) {
  const auto nn = naive_knn(q, src, k);
  const std::size_t c = feats.shape()[1];
  std::vector<double> out(c, 0.0);
  if (dist(q, src[nn[0]]) < eps) {
    for (std::size_t j = 0; j < c; ++j) out[j] = feats(nn[0], j);
    return out;
  }
  double total = 0.0;
  for (auto i : nn) total += 1.0 / std::pow(dist(q, src[i]), power);
  for (auto i : nn) {
    const double w = 1.0 / std::pow(dist(q, src[i]), power) / total;
    for (std::size_t j = 0; j < c; ++j) out[j] += w * feats(i, j);
  }
  return out;
}

struct BruteForceMatch {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<std::optional<std::size_t>> assignment;  // per query
};

// Minimum over all injective maps GT -> query, by recursion.
inline BruteForceMatch brute_force_match(const std::vector<double>& cost, std::size_t nq, std::size_t ng) {
  std::vector<std::optional<std::size_t>> current(nq);
  BruteForceMatch best;
  best.assignment = current;
  auto rec = [&](auto&& self, std::size_t g, double acc) -> void {
    if (g == ng) {
      if (acc < best.cost) best = {acc, current};
      return;
    }
    for (std::size_t q = 0; q < nq; ++q) {
      if (current[q]) continue;
      current[q] = g;
      self(self, g + 1, acc + cost[q * ng + g]);
      current[q].reset();
    }
  };
  rec(rec, 0, 0.0);
  return best;
}

inline double brute_force_assignment(const std::vector<double>& cost, std::size_t nq, std::size_t ng) {
  return brute_force_match(cost, nq, ng).cost;
}

// AP as a sum over recall steps of the best precision at any equal-or-higher
// recall, computed by scanning the whole list for every step.
inline double step_sum_ap(std::vector<std::pair<double, bool>> dets, std::size_t n_gt) {
  std::stable_sort(dets.begin(), dets.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<double> prec, rec;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    tp += dets[i].second ? 1 : 0;
    prec.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
    rec.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (!dets[i].second) continue;
    double best = 0.0;
    for (std::size_t j = i; j < dets.size(); ++j) best = std::max(best, prec[j]);
    ap += (rec[i] - prev_recall) * best;
    prev_recall = rec[i];
  }
  return ap;
}

inline double naive_iou(const Box3D& a, const Box3D& b) {
  double inter = 1.0;
  for (int k = 0; k < 3; ++k) {
    const double lo = std::max(a.center[k] - a.size[k] / 2, b.center[k] - b.size[k] / 2);
    const double hi = std::min(a.center[k] + a.size[k] / 2, b.center[k] + b.size[k] / 2);
    inter *= std::max(0.0, hi - lo);
  }
  return inter / (a.volume() + b.volume() - inter);
}

// Greedy assignment in the given order, re-scanning every GT per detection.
inline std::vector<bool> naive_greedy_match(const std::vector<Box3D>& dets, const std::vector<Box3D>& gts,
                                            double thr) {
  std::vector<bool> taken(gts.size(), false), tp;
  for (const auto& d : dets) {
    double best = -1.0;
    std::optional<std::size_t> arg;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g] || gts[g].class_id != d.class_id) continue;
      const double iou = naive_iou(d, gts[g]);
      if (iou > best) {
        best = iou;
        arg = g;
      }
    }
    const bool hit = arg && best >= thr;
    if (hit) taken[*arg] = true;
    tp.push_back(hit);
  }
  return tp;
}

}  // namespace msadet::testing
