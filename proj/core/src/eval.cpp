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
#include "msadet/eval.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "msadet/errors.hpp"

namespace msadet {

bool Box3D::contains(const Vec3& p) const {
  const Vec3 l = lo(), h = hi();
  for (int a = 0; a < 3; ++a) {
    if (p[a] < l[a] || p[a] > h[a]) return false;
  }
  return true;
}

void EvalConfig::validate() const {
  if (iou_thresholds.empty()) throw ConfigError("at least one IoU threshold is required");
  for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
    const double t = iou_thresholds[i];
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("IoU thresholds must lie in (0, 1]");
    if (i > 0 && !(t > iou_thresholds[i - 1])) throw ConfigError("IoU thresholds must be strictly increasing");
  }
}

double iou_aabb(const Box3D& a, const Box3D& b) {
  const Vec3 al = a.lo(), ah = a.hi(), bl = b.lo(), bh = b.hi();
  double inter = 1.0;
  for (int k = 0; k < 3; ++k) {
    const double overlap = std::min(ah[k], bh[k]) - std::max(al[k], bl[k]);
    if (overlap <= 0.0) return 0.0;
    inter *= overlap;
  }
  const double uni = a.volume() + b.volume() - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

std::vector<bool> match_detections(std::span<const Box3D> dets, std::span<const Box3D> gts, double threshold) {
  std::vector<bool> tp(dets.size(), false);
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t i = 0; i < dets.size(); ++i) {
    double best = -1.0;
    std::size_t best_gt = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g] || gts[g].class_id != dets[i].class_id) continue;
      const double iou = iou_aabb(dets[i], gts[g]);
      if (iou > best) {
        best = iou;
        best_gt = g;
      }
    }
    if (best_gt < gts.size() && best >= threshold) {
      tp[i] = true;
      taken[best_gt] = true;
    }
  }
  return tp;
}

std::vector<std::size_t> rank_by_score(std::span<const Box3D> boxes) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return boxes[a].score > boxes[b].score; });
  return order;
}

PRCurve pr_curve(std::span<const std::pair<double, bool>> detections, std::size_t n_gt) {
  if (n_gt == 0) throw std::invalid_argument("average precision is undefined without ground truth");
  std::vector<std::pair<double, bool>> ranked(detections.begin(), detections.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  PRCurve c;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    c.scores.push_back(ranked[i].first);
    c.is_tp.push_back(ranked[i].second);
    if (ranked[i].second) ++tp;
    c.precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
    c.recall.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
  }
  std::vector<double> envelope = c.precision;
  for (std::size_t i = envelope.size(); i-- > 1;) envelope[i - 1] = std::max(envelope[i - 1], envelope[i]);
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < envelope.size(); ++i) {
    c.ap += (c.recall[i] - prev_recall) * envelope[i];
    prev_recall = c.recall[i];
  }
  c.ap = std::clamp(c.ap, 0.0, 1.0);
  return c;
}

double average_precision(std::span<const std::pair<double, bool>> detections, std::size_t n_gt) {
  return pr_curve(detections, n_gt).ap;
}

const ThresholdResult& EvalResult::at(double iou) const {
  for (const auto& t : thresholds) {
    if (t.iou == iou) return t;
  }
  throw std::out_of_range("no evaluation at IoU " + std::to_string(iou));
}

EvalResult map_at(std::span<const std::vector<Box3D>> dets_by_scene, std::span<const std::vector<Box3D>> gts_by_scene,
                  const EvalConfig& cfg) {
  cfg.validate();
  if (dets_by_scene.size() != gts_by_scene.size()) {
    throw std::invalid_argument("map_at: " + std::to_string(dets_by_scene.size()) + " detection scenes vs " +
                                std::to_string(gts_by_scene.size()) + " ground-truth scenes");
  }
  std::size_t n_classes = cfg.class_names.size();
  for (const auto& scene : gts_by_scene) {
    for (const auto& b : scene) n_classes = std::max(n_classes, b.class_id + 1);
  }
  for (const auto& scene : dets_by_scene) {
    for (const auto& b : scene) n_classes = std::max(n_classes, b.class_id + 1);
  }

  std::vector<std::size_t> n_gt(n_classes, 0);
  for (const auto& scene : gts_by_scene) {
    for (const auto& b : scene) ++n_gt[b.class_id];
  }

  EvalResult result;
  for (double thr : cfg.iou_thresholds) {
    std::vector<std::vector<std::pair<double, bool>>> pooled(n_classes);
    for (std::size_t s = 0; s < dets_by_scene.size(); ++s) {
      const auto order = rank_by_score(dets_by_scene[s]);
      std::vector<Box3D> ranked;
      ranked.reserve(order.size());
      for (auto i : order) ranked.push_back(dets_by_scene[s][i]);
      const auto tp = match_detections(ranked, gts_by_scene[s], thr);
      for (std::size_t i = 0; i < ranked.size(); ++i) pooled[ranked[i].class_id].emplace_back(ranked[i].score, tp[i]);
    }
    ThresholdResult tr;
    tr.iou = thr;
    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
      ClassAP cap{c, n_gt[c], pooled[c].size(), std::nullopt};
      if (n_gt[c] > 0) {
        cap.ap = average_precision(pooled[c], n_gt[c]);
        total += *cap.ap;
        ++counted;
      }
      tr.per_class.push_back(cap);
    }
    if (counted > 0) tr.map = total / static_cast<double>(counted);
    result.thresholds.push_back(std::move(tr));
  }
  return result;
}

}  // namespace msadet
