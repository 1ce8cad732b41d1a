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
// Axis-aligned 3D IoU, greedy detection matching, all-point interpolated AP,
// mAP over IoU thresholds, and per-category report tables.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "msadet/types.hpp"

namespace msadet {

struct EvalConfig {
  std::vector<double> iou_thresholds{0.25, 0.5};
  /// Display names indexed by class id; must be known report categories.
  std::vector<std::string> class_names;

  void validate() const;
};

double iou_aabb(const Box3D& a, const Box3D& b);

/// Greedy matching in the given order (callers pass descending score): each
/// detection takes the highest-IoU still-unmatched ground truth of its class
/// if that IoU reaches `threshold`. Returns one TP flag per detection.
std::vector<bool> match_detections(std::span<const Box3D> dets, std::span<const Box3D> gts, double threshold);

/// Indices of `boxes` by descending score, ties kept in input order.
std::vector<std::size_t> rank_by_score(std::span<const Box3D> boxes);

struct PRCurve {
  std::vector<double> scores;  // descending
  std::vector<bool> is_tp;
  std::vector<double> precision;
  std::vector<double> recall;
  double ap = 0.0;
};

/// Ranks (score, is_tp) pairs (stable descending score) and integrates the
/// monotone precision envelope over recall. `n_gt` must be positive.
PRCurve pr_curve(std::span<const std::pair<double, bool>> detections, std::size_t n_gt);
double average_precision(std::span<const std::pair<double, bool>> detections, std::size_t n_gt);

struct ClassAP {
  std::size_t class_id = 0;
  std::size_t n_gt = 0;
  std::size_t n_det = 0;
  std::optional<double> ap;  // absent when the class has no ground truth
};

struct ThresholdResult {
  double iou = 0.0;
  std::vector<ClassAP> per_class;
  std::optional<double> map;  // mean over classes with ground truth
};

struct EvalResult {
  std::vector<ThresholdResult> thresholds;

  const ThresholdResult& at(double iou) const;
};

/// Scenes are paired by position. The class count is max(class_names.size(),
/// largest class id seen + 1).
EvalResult map_at(std::span<const std::vector<Box3D>> dets_by_scene, std::span<const std::vector<Box3D>> gts_by_scene,
                  const EvalConfig& cfg);

// ---- reports ----------------------------------------------------------------

/// The 18 report categories in their fixed column order.
std::span<const std::string> report_categories();

struct ReportRow {
  std::string method;
  std::vector<std::pair<std::string, std::optional<double>>> ap_by_class;  // fractions in [0, 1]
  std::optional<double> map;
};

struct ReportTable {
  std::string title;
  std::vector<std::string> columns;  // categories present in any row, canonical order
  std::vector<ReportRow> rows;
};

/// Builds a table row from one threshold's results. Throws std::invalid_argument
/// for a class name outside report_categories().
ReportRow make_report_row(std::string method, const ThresholdResult& result, std::span<const std::string> class_names);
ReportTable make_report_table(std::string title, std::vector<ReportRow> rows);

/// "Method,<categories...>,mAP" then one line per row; AP as percent with two
/// decimals, "-" for absent classes.
std::string render_csv(const ReportTable& table);
std::string render_text(const ReportTable& table);

}  // namespace msadet
