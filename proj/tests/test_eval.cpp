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
#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "msadet/errors.hpp"
#include "msadet/eval.hpp"
#include "oracles.hpp"

namespace msadet {
namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(MSADET_TEST_DATA_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Box3D box(double x, double y, double z, double s, std::size_t cls, double score = 1.0) {
  return {{x, y, z}, {s, s, s}, cls, score};
}

std::vector<Box3D> random_boxes(std::size_t n, std::size_t classes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.0, 4.0), size(0.3, 1.5), score(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> cls(0, classes - 1);
  std::vector<Box3D> out(n);
  for (auto& b : out) b = {{pos(rng), pos(rng), pos(rng)}, {size(rng), size(rng), size(rng)}, cls(rng), score(rng)};
  return out;
}

// Detections near the ground truth plus clutter.
std::vector<Box3D> noisy_copies(const std::vector<Box3D>& gts, std::size_t classes, std::mt19937_64& rng) {
  std::normal_distribution<double> jitter(0.0, 0.15);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::vector<Box3D> out;
  for (const auto& g : gts) {
    Box3D d = g;
    for (auto& c : d.center) c += jitter(rng);
    for (auto& s : d.size) s = std::max(0.05, s * (1.0 + jitter(rng)));
    d.score = score(rng);
    out.push_back(d);
  }
  auto clutter = random_boxes(std::uniform_int_distribution<std::size_t>(0, 4)(rng), classes, rng);
  out.insert(out.end(), clutter.begin(), clutter.end());
  return out;
}

TEST(Iou, KnownOverlaps) {
  EXPECT_DOUBLE_EQ(iou_aabb(box(0, 0, 0, 1, 0), box(0, 0, 0, 1, 0)), 1.0);
  EXPECT_DOUBLE_EQ(iou_aabb(box(0, 0, 0, 1, 0), box(5, 0, 0, 1, 0)), 0.0);
  const Box3D half{{0.5, 0, 0}, {1, 1, 1}, 0, 1};
  EXPECT_NEAR(iou_aabb(box(0, 0, 0, 1, 0), half), 0.5 / 1.5, 1e-15);
  EXPECT_DOUBLE_EQ(iou_aabb(box(0, 0, 0, 2, 0), box(0, 0, 0, 1, 0)), 1.0 / 8.0);
}

TEST(Iou, MatchesNaiveFormulaAndIsSymmetric) {
  std::mt19937_64 rng(50);
  const auto a = random_boxes(200, 1, rng), b = random_boxes(200, 1, rng);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(iou_aabb(a[i], b[i]), testing::naive_iou(a[i], b[i]), 1e-12);
    EXPECT_EQ(iou_aabb(a[i], b[i]), iou_aabb(b[i], a[i]));
  }
}

TEST(AveragePrecision, MatchesStepSumOracle) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::bernoulli_distribution hit(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 30)(rng);
    std::vector<std::pair<double, bool>> dets(n);
    std::size_t tps = 0;
    for (auto& d : dets) {
      // Coarse scores force ties.
      d = {std::round(score(rng) * 10.0) / 10.0, hit(rng)};
      tps += d.second;
    }
    const std::size_t n_gt = tps + std::uniform_int_distribution<std::size_t>(1, 5)(rng);
    EXPECT_NEAR(average_precision(dets, n_gt), testing::step_sum_ap(dets, n_gt), 1e-12);
  }
}

TEST(AveragePrecision, HandWorkedCurve) {
  // TP, FP, TP with 3 GT: recall 1/3 at precision 1, recall 2/3 at precision 2/3.
  const std::vector<std::pair<double, bool>> dets{{0.9, true}, {0.8, false}, {0.7, true}};
  EXPECT_NEAR(average_precision(dets, 3), 1.0 / 3.0 + (1.0 / 3.0) * (2.0 / 3.0), 1e-15);
  EXPECT_THROW(average_precision(dets, 0), std::invalid_argument);
}

TEST(Matching, MatchesGreedyOracle) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 200; ++trial) {
    const auto gts = random_boxes(6, 3, rng);
    auto dets = noisy_copies(gts, 3, rng);
    const auto order = rank_by_score(dets);
    std::vector<Box3D> ranked;
    for (auto i : order) ranked.push_back(dets[i]);
    for (double thr : {0.25, 0.5}) {
      EXPECT_EQ(match_detections(ranked, gts, thr), testing::naive_greedy_match(ranked, gts, thr));
    }
  }
}

TEST(Matching, DuplicateDetectionsCountOnce) {
  const std::vector<Box3D> gts{box(0, 0, 0, 1, 2)};
  const std::vector<Box3D> dets{box(0, 0, 0, 1, 2, 0.9), box(0, 0, 0, 1, 2, 0.8), box(0, 0, 0, 1, 1, 0.7)};
  EXPECT_EQ(match_detections(dets, gts, 0.5), (std::vector<bool>{true, false, false}));
}

TEST(Map, PerfectDetectionsScoreOneAtBothThresholds) {
  std::mt19937_64 rng(53);
  std::vector<std::vector<Box3D>> gts;
  for (int s = 0; s < 5; ++s) gts.push_back(random_boxes(4, 6, rng));
  EvalConfig cfg;
  const auto r = map_at(gts, gts, cfg);
  EXPECT_EQ(r.at(0.25).map, std::optional<double>(1.0));
  EXPECT_EQ(r.at(0.5).map, std::optional<double>(1.0));
}

TEST(Map, ClassesWithoutGroundTruthAreExcluded) {
  const std::vector<std::vector<Box3D>> gts{{box(0, 0, 0, 1, 0)}};
  const std::vector<std::vector<Box3D>> dets{{box(0, 0, 0, 1, 0, 0.9), box(3, 3, 3, 1, 2, 0.8)}};
  EvalConfig cfg;
  cfg.class_names = {"cab", "bed", "chair"};
  const auto r = map_at(dets, gts, cfg).at(0.25);
  ASSERT_EQ(r.per_class.size(), 3u);
  EXPECT_EQ(r.per_class[0].ap, std::optional<double>(1.0));
  EXPECT_FALSE(r.per_class[2].ap.has_value());
  EXPECT_EQ(r.per_class[2].n_det, 1u);
  EXPECT_EQ(r.map, std::optional<double>(1.0));
}

TEST(Map, StricterThresholdNeverScoresHigher) {
  std::mt19937_64 rng(54);
  EvalConfig cfg;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<Box3D>> gts, dets;
    for (int s = 0; s < 3; ++s) {
      gts.push_back(random_boxes(std::uniform_int_distribution<std::size_t>(0, 5)(rng), 4, rng));
      dets.push_back(noisy_copies(gts.back(), 4, rng));
    }
    const auto r = map_at(dets, gts, cfg);
    if (!r.at(0.25).map) continue;
    EXPECT_LE(*r.at(0.5).map, *r.at(0.25).map);
  }
}

TEST(EvalConfig, RejectsBadThresholds) {
  EvalConfig cfg;
  cfg.iou_thresholds = {0.5, 0.25};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.iou_thresholds = {0.0};
  EXPECT_THROW(cfg.validate(), ConfigError);
}

ReportTable fixture_table() {
  ReportRow base{"baseline", {{"chair", 0.5}, {"cab", 0.25}, {"grbin", std::nullopt}}, 0.375};
  ReportRow msa{"msa", {{"cab", 1.0 / 3.0}, {"chair", 0.6667}, {"grbin", 0.0}}, 1.0 / 3.0};
  return make_report_table("AP@25", {base, msa});
}

TEST(Report, ColumnsFollowCanonicalOrder) {
  const auto t = fixture_table();
  EXPECT_EQ(t.columns, (std::vector<std::string>{"cab", "chair", "grbin"}));
  EXPECT_EQ(report_categories().size(), 18u);
  EXPECT_EQ(report_categories().front(), "cab");
  EXPECT_EQ(report_categories().back(), "grbin");
}

TEST(Report, MatchesGoldenFiles) {
  const auto t = fixture_table();
  EXPECT_EQ(render_csv(t), read_fixture("report_golden.csv"));
  EXPECT_EQ(render_text(t), read_fixture("report_golden.txt"));
}

TEST(Report, SingleClassPerfectScore) {
  ThresholdResult r;
  r.iou = 0.25;
  r.per_class = {{0, 1, 1, 1.0}};
  r.map = 1.0;
  const std::vector<std::string> names{"sofa"};
  const auto t = make_report_table("", {make_report_row("m", r, names)});
  EXPECT_EQ(render_csv(t), "Method,sofa,mAP\nm,100.00,100.00\n");
  const std::vector<std::string> unknown{"lamp"};
  EXPECT_THROW(make_report_row("m", r, unknown), std::invalid_argument);
}

}  // namespace
}  // namespace msadet
