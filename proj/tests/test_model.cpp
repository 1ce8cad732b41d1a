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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <map>
#include <set>
#include <tuple>

#include "msadet/errors.hpp"
#include "msadet/matching.hpp"
#include "msadet/model.hpp"
#include "msadet/scene_gen.hpp"
#include "msadet/training.hpp"
#include "oracles.hpp"

namespace msadet {
namespace {

ModelConfig small_config(bool msa) {
  ModelConfig cfg;
  cfg.n_raw_points = 256;
  cfg.n_encoder_points = 32;
  cfg.n_dense_points = 64;
  cfg.d_model = 16;
  cfg.n_heads = 4;
  cfg.n_encoder_layers = 2;
  cfg.n_decoder_layers = 2;
  cfg.n_queries = 8;
  cfg.sa_hidden = 16;
  cfg.ffn_hidden = 16;
  cfg.n_freqs = 2;
  cfg.msa_enabled = msa;
  return cfg;
}

Scene small_scene(std::uint64_t seed) {
  SceneSpec spec;
  spec.seed = seed;
  spec.n_points = 256;
  return generate_scene(spec);
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

// ---- matching ---------------------------------------------------------------

TEST(Hungarian, IdentityCostIsFree) {
  const std::vector<double> cost{0, 1, 1, 0};
  const auto m = hungarian_match(cost, 2, 2);
  EXPECT_EQ(m.assignment[0], std::optional<std::size_t>(0));
  EXPECT_EQ(m.assignment[1], std::optional<std::size_t>(1));
  EXPECT_EQ(m.total_cost, 0.0);
}

TEST(Hungarian, SingleGroundTruthTakesCheapestQuery) {
  const std::vector<double> cost{0.7, 0.2, 0.9, 0.4};
  const auto m = hungarian_match(cost, 4, 1);
  EXPECT_EQ(m.assignment[1], std::optional<std::size_t>(0));
  EXPECT_EQ(std::count(m.assignment.begin(), m.assignment.end(), std::nullopt), 3);
}

TEST(Hungarian, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(40);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::uniform_int_distribution<std::size_t> dim(1, 7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t nq = dim(rng);
    const std::size_t ng = std::uniform_int_distribution<std::size_t>(0, nq)(rng);
    std::vector<double> cost(nq * ng);
    for (auto& c : cost) c = u(rng);
    const auto m = hungarian_match(cost, nq, ng);
    EXPECT_NEAR(m.total_cost, testing::brute_force_assignment(cost, nq, ng), 1e-12);
    std::set<std::size_t> seen;
    double sum = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      if (!m.assignment[q]) continue;
      EXPECT_TRUE(seen.insert(*m.assignment[q]).second);
      sum += cost[q * ng + *m.assignment[q]];
    }
    EXPECT_EQ(seen.size(), ng);
    EXPECT_NEAR(sum, m.total_cost, 1e-12);
  }
}

TEST(Hungarian, RejectsMoreGroundTruthThanQueries) {
  const std::vector<double> cost(6, 1.0);
  EXPECT_THROW(hungarian_match(cost, 2, 3), std::invalid_argument);
}

// ---- encoder / decoder --------------------------------------------------------

TEST(Encoder, ZeroLayersIsIdentity) {
  std::mt19937_64 rng(41);
  const Tensor x = uniform({5, 8}, rng, -1.0, 1.0);
  const Tensor out = encode(x, uniform({5, 8}, rng, -1.0, 1.0), {});
  EXPECT_TRUE(out.same_storage(x));
}

TEST(Encoder, PermutingPointsPermutesOutputs) {
  std::mt19937_64 rng(42);
  ParamStore store(3);
  const MHAConfig att{8, 2};
  std::vector<EncoderLayerParams> layers;
  for (int i = 0; i < 2; ++i) {
    const std::string p = "enc" + std::to_string(i);
    layers.push_back({AttentionParams::create(store, p, att), store.add_mlp(p + ".ffn", 8, 12, 8)});
  }
  const Tensor x = uniform({9, 8}, rng, -1.0, 1.0);
  const Tensor pos = uniform({9, 8}, rng, -1.0, 1.0);
  std::vector<std::size_t> perm(9);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  const Tensor a = gather_rows(encode(x, pos, layers), perm);
  const Tensor b = encode(gather_rows(x, perm), gather_rows(pos, perm), layers);
  EXPECT_EQ(a.shape(), (Shape{9, 8}));
  EXPECT_LE(max_abs_diff(a, b), 1e-12);
}

struct DecoderFixture {
  ParamStore store{5};
  MHAConfig att{8, 2};
  std::vector<DecoderLayerParams> layers;
  Tensor queries, memory, memory_pos;

  DecoderFixture() {
    std::mt19937_64 rng(43);
    for (int i = 0; i < 3; ++i) {
      const std::string p = "dec" + std::to_string(i);
      DecoderLayerParams l;
      l.self_attn = AttentionParams::create(store, p + ".self", att);
      l.cross_attn = AttentionParams::create(store, p + ".cross", att);
      l.ffn = store.add_mlp(p + ".ffn", 8, 12, 8);
      layers.push_back(l);
    }
    queries = uniform({4, 8}, rng, -1.0, 1.0);
    memory = uniform({10, 8}, rng, -1.0, 1.0);
    memory_pos = uniform({10, 8}, rng, -1.0, 1.0);
  }
};

TEST(Decoder, BaselineMatchesHandWrittenLayers) {
  DecoderFixture f;
  Tensor t = f.queries;
  for (const auto& l : f.layers) {
    t = layer_norm(add(t, mha(t, t, l.self_attn)));
    t = layer_norm(add(t, mha(t, add(f.memory, f.memory_pos), l.cross_attn)));
    t = layer_norm(add(t, apply(l.ffn, t)));
  }
  const Tensor out = decode(f.queries, f.memory, f.memory_pos, Tensor{}, Tensor{}, f.layers);
  ASSERT_EQ(out.shape(), (Shape{4, 8}));
  for (std::size_t i = 0; i < out.numel(); ++i) EXPECT_EQ(out.data()[i], t.data()[i]);
}

TEST(Decoder, TiedMultiScaleOnDuplicatedMemoryEqualsBaseline) {
  DecoderFixture f;
  const Tensor base = decode(f.queries, f.memory, f.memory_pos, Tensor{}, Tensor{}, f.layers);
  auto msa_layers = f.layers;
  msa_layers[0].cross_msa = MSAParams::tied(f.layers[0].cross_attn);
  const Tensor out = decode(f.queries, f.memory, f.memory_pos, f.memory, f.memory_pos, msa_layers);
  EXPECT_LE(max_abs_diff(out, base), 1e-12);
}

TEST(Decoder, DenseFeaturesMustMatchMultiScaleFlag) {
  DecoderFixture f;
  auto msa_layers = f.layers;
  msa_layers[0].cross_msa = MSAParams::tied(f.layers[0].cross_attn);
  EXPECT_THROW(decode(f.queries, f.memory, f.memory_pos, Tensor{}, Tensor{}, msa_layers), ConfigError);
  EXPECT_THROW(decode(f.queries, f.memory, f.memory_pos, f.memory, f.memory_pos, f.layers), ConfigError);
}

// ---- heads and loss -------------------------------------------------------------

HeadParams zero_heads(ParamStore& store, std::size_t d, std::size_t classes) {
  HeadParams h{store.add_mlp("cls", d, d, classes + 1), store.add_mlp("ctr", d, d, 3), store.add_mlp("sz", d, d, 3)};
  for (const auto& [_, t] : store.entries()) {
    Tensor handle = t;
    std::fill(handle.data().begin(), handle.data().end(), 0.0);
  }
  return h;
}

TEST(Heads, ZeroWeightsGiveUnitBoxesAtAnchors) {
  ParamStore store(6);
  const auto heads = zero_heads(store, 8, 3);
  const std::vector<Vec3> anchors{{1, 2, 3}, {-1, 0, 0.5}};
  const auto preds = predict_heads(Tensor::zeros({2, 8}), anchors, heads);
  const auto boxes = decode_boxes(preds);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(boxes[i].center, anchors[i]);
    EXPECT_EQ(boxes[i].size, (Vec3{1.0, 1.0, 1.0}));
    EXPECT_DOUBLE_EQ(boxes[i].score, 0.25);
  }
}

TEST(Heads, ScoresAreProbabilitiesAndSizesPositive) {
  std::mt19937_64 rng(44);
  ParamStore store(7);
  const HeadParams heads{store.add_mlp("cls", 8, 8, 5), store.add_mlp("ctr", 8, 8, 3), store.add_mlp("sz", 8, 8, 3)};
  const std::vector<Vec3> anchors(6, Vec3{0, 0, 0});
  const auto preds = predict_heads(uniform({6, 8}, rng, -30.0, 30.0), anchors, heads);
  const Tensor p = softmax_rows(preds.logits);
  for (std::size_t r = 0; r < 6; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 5; ++c) s += p(r, c);
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  for (const auto& b : decode_boxes(preds)) {
    EXPECT_GE(b.score, 0.0);
    EXPECT_LE(b.score, 1.0);
    EXPECT_LT(b.class_id, 4u);
    for (double s : b.size) EXPECT_GT(s, 0.0);
  }
}

TEST(Loss, PerfectConfidentPredictionsCostAlmostNothing) {
  const std::vector<Box3D> gts{{{1, 1, 0.5}, {0.5, 0.6, 1.0}, 2, 1.0}};
  Predictions p;
  p.logits = Tensor::from_data({2, 4}, {0, 0, 60, 0, 0, 0, 0, 60});
  p.centers = Tensor::from_data({2, 3}, {1, 1, 0.5, 9, 9, 9});
  p.sizes = Tensor::from_data({2, 3}, {0.5, 0.6, 1.0, 1, 1, 1});
  const auto m = hungarian_match(matching_cost(p, gts, {}), 2, 1);
  EXPECT_EQ(m.assignment[0], std::optional<std::size_t>(0));
  EXPECT_LT(detection_loss(p, gts, m, {}).item(), 1e-20);
}

TEST(Loss, EmptySceneIsPureNoObjectCrossEntropy) {
  std::mt19937_64 rng(45);
  Predictions p;
  p.logits = uniform({3, 4}, rng, -1.0, 1.0);
  p.centers = uniform({3, 3}, rng, -1.0, 1.0);
  p.sizes = uniform({3, 3}, rng, 0.5, 1.0);
  const auto m = hungarian_match({}, 3, 0);
  const std::vector<std::size_t> none(3, 3);
  EXPECT_DOUBLE_EQ(detection_loss(p, {}, m, {}).item(), cross_entropy(p.logits, none).item());
}

TEST(Loss, MatchingCostFollowsWeightedTerms) {
  const std::vector<Box3D> gts{{{0, 0, 0}, {1, 1, 1}, 0, 1.0}};
  Predictions p;
  p.logits = Tensor::zeros({1, 3});
  p.centers = Tensor::from_data({1, 3}, {0.5, 0, 0});
  p.sizes = Tensor::from_data({1, 3}, {1, 2, 1});
  const auto c = matching_cost(p, gts, LossWeights{2.0, 5.0, 3.0});
  EXPECT_NEAR(c[0], 2.0 * (1.0 - 1.0 / 3.0) + 5.0 * 0.5 + 3.0 * 1.0, 1e-15);
}

// ---- detector -----------------------------------------------------------------

TEST(Detector, ConfigRejectsMaskedEncoderWithMsa) {
  ModelConfig cfg = small_config(true);
  cfg.masked_encoder = true;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config(true);
  cfg.n_dense_points = 48;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config(true);
  cfg.n_heads = 3;
  cfg.d_model = 15;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Detector, MsaChangesOnlyFirstDecoderLayerAndUpsampling) {
  const Detector on(small_config(true), 9), off(small_config(false), 9);
  std::map<std::string, Shape> a, b;
  for (const auto& [n, t] : on.params().entries()) a[n] = t.shape();
  for (const auto& [n, t] : off.params().entries()) b[n] = t.shape();
  for (const auto& [n, shape] : a) {
    const bool msa_only = n.rfind("upsample.", 0) == 0 || n.find("decoder.0.cross_attn.branch") == 0;
    if (msa_only) {
      EXPECT_EQ(b.count(n), 0u) << n;
    } else {
      ASSERT_EQ(b.count(n), 1u) << n;
      EXPECT_EQ(b[n], shape) << n;
      // Same name, same initial values.
      EXPECT_EQ(std::vector<double>(on.params().find(n).data().begin(), on.params().find(n).data().end()),
                std::vector<double>(off.params().find(n).data().begin(), off.params().find(n).data().end()));
    }
  }
  for (const auto& [n, _] : b) {
    if (!a.count(n)) {
      EXPECT_TRUE(n.rfind("decoder.0.cross_attn.w", 0) == 0) << n;
    }
  }
}

TEST(Detector, FlopsDifferOnlyInFirstDecoderStage) {
  const Scene scene = small_scene(3);
  std::map<std::string, std::uint64_t> flops[2];
  for (int on = 0; on < 2; ++on) {
    const Detector model(small_config(on == 1), 4);
    const auto geom = model.prepare(scene.points);
    OpCounter counter;
    NoGradScope no_grad;
    (void)model.forward(geom);
    flops[on] = counter.by_stage();
  }
  for (const auto& [stage, n] : flops[0]) {
    if (stage == "decoder.0") EXPECT_LT(n, flops[1].at(stage));
    else EXPECT_EQ(n, flops[1].at(stage)) << stage;
  }
  EXPECT_EQ(flops[0].size(), flops[1].size());
}

TEST(Detector, InferenceIgnoresInputPointOrder) {
  const Scene scene = small_scene(4);
  const Detector model(small_config(true), 5);
  Scene shuffled = scene;
  std::mt19937_64 rng(46);
  std::shuffle(shuffled.points.begin(), shuffled.points.end(), rng);
  auto key = [](std::vector<Box3D> boxes) {
    std::sort(boxes.begin(), boxes.end(), [](const Box3D& x, const Box3D& y) {
      return std::tie(x.center, x.size, x.class_id) < std::tie(y.center, y.size, y.class_id);
    });
    return boxes;
  };
  const auto a = infer(model, scene), b = infer(model, shuffled);
  ASSERT_EQ(a.boxes.size(), b.boxes.size());
  const auto ka = key(a.boxes), kb = key(b.boxes);
  for (std::size_t i = 0; i < ka.size(); ++i) {
    EXPECT_EQ(ka[i].class_id, kb[i].class_id);
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(ka[i].center[k], kb[i].center[k], 1e-9);
      EXPECT_NEAR(ka[i].size[k], kb[i].size[k], 1e-9);
    }
  }
}

TEST(Detector, GeometryUsesPrefixOfDenseSampling) {
  const Scene scene = small_scene(5);
  const Detector model(small_config(true), 6);
  const auto g = model.prepare(scene.points);
  ASSERT_EQ(g.dense_points.size(), 64u);
  for (std::size_t i = 0; i < 32; ++i) EXPECT_EQ(g.dense_points[i], g.encoder_points[i]);
  EXPECT_EQ(g.query_points.size(), 8u);
}

}  // namespace
}  // namespace msadet
