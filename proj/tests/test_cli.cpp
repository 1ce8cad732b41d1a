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

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "msadet/cli.hpp"
#include "msadet/io.hpp"

namespace msadet {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "msadet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("msadet_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
    write_file_atomic(dir_ / "toy.cfg",
                      "train.seed = 5\n"
                      "train.optimizer = adam\n"
                      "model.n_raw_points = 256\n"
                      "model.n_encoder_points = 32\n"
                      "model.n_dense_points = 64\n"
                      "model.d_model = 16\n"
                      "model.n_heads = 2\n"
                      "model.n_encoder_layers = 1\n"
                      "model.n_decoder_layers = 2\n"
                      "model.n_queries = 4\n"
                      "data.n_scenes = 2\n"
                      "data.n_points = 256\n"
                      "data.max_objects = 2\n");
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, UsageErrorsExitTwo) {
  auto r = run({"train", "--bogus"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error"), std::string::npos);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bench", "--op", "sort"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, RuntimeFailuresExitOne) {
  write_file_atomic(dir_ / "bad.cfg", "train.seed = 1\nmodel.n_heads = 3\n");
  auto r = run({"gen-data", "--config", p("bad.cfg"), "--seed", "1", "--out", p("data")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("head"), std::string::npos);
  write_file_atomic(dir_ / "garbage.txt", "not a box list\n");
  write_file_atomic(dir_ / "gt.txt", "");
  EXPECT_EQ(run({"eval", p("garbage.txt"), "--scenes", p("gt.txt")}).code, 1);
}

TEST_F(CliTest, GradcheckIsDeterministic) {
  const auto a = run({"gradcheck", "--seed", "7"});
  const auto b = run({"gradcheck", "--seed", "7"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("msa_dual,"), std::string::npos);
}

TEST_F(CliTest, BenchEmitsOneRowPerSize) {
  const auto r = run({"bench", "--op", "wid", "--sizes", "1024,4096"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "op,n_points,repeats,mean_seconds,min_seconds");
  std::vector<std::size_t> sizes;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string op, n, reps, mean, min;
    std::getline(row, op, ',');
    std::getline(row, n, ',');
    std::getline(row, reps, ',');
    std::getline(row, mean, ',');
    std::getline(row, min, ',');
    EXPECT_EQ(op, "wid");
    EXPECT_GE(std::stoul(reps), 3u);
    EXPECT_GT(std::stod(mean), 0.0);
    EXPECT_LE(std::stod(min), std::stod(mean));
    sizes.push_back(std::stoul(n));
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{1024, 4096}));
}

TEST_F(CliTest, PerfectDetectionsScoreHundred) {
  const std::vector<SceneBoxes> gt{{"s0", {{{1, 1, 0.5}, {1, 1, 1}, 0, 1.0}, {{3, 3, 0.5}, {0.5, 0.5, 1}, 2, 1.0}}}};
  write_file_atomic(dir_ / "gt.txt", format_boxes(gt, false));
  write_file_atomic(dir_ / "perfect.txt", format_boxes(gt, true));
  const auto r = run({"eval", p("perfect.txt"), "--scenes", p("gt.txt"), "--out", p("rep")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("AP@25"), std::string::npos);
  EXPECT_NE(r.out.find("AP@50"), std::string::npos);
  const auto csv = read_file(dir_ / "rep" / "report_iou50.csv");
  EXPECT_EQ(csv, "Method,cab,chair,mAP\nperfect,100.00,100.00,100.00\n");
}

TEST_F(CliTest, GenerateTrainInferEvaluate) {
  auto r = run({"gen-data", "--config", p("toy.cfg"), "--seed", "40", "--out", p("data")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "data" / "scene_40.lods"));
  EXPECT_TRUE(fs::exists(dir_ / "data" / "scene_41.lods"));

  r = run({"train", "--config", p("toy.cfg"), "--seed", "3", "--scenes", p("data"), "--steps", "5", "--msa", "on",
           "--out", p("run")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto log = parse_loss_log(read_file(dir_ / "run" / "loss.csv"));
  EXPECT_EQ(log.size(), 5u);

  r = run({"infer", "--checkpoint", p("run/model.ckpt"), "--scenes", p("data"), "--out", p("inf")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto dets = parse_boxes(read_file(dir_ / "inf" / "detections.txt"), true);
  ASSERT_EQ(dets.size(), 2u);

  r = run({"eval", p("inf/detections.txt"), "--scenes", p("data"), "--config", p("toy.cfg")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mAP"), std::string::npos);
}

}  // namespace
}  // namespace msadet
