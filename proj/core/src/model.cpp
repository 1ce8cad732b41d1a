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
#include "msadet/model.hpp"

#include <algorithm>
#include <cmath>

#include "msadet/errors.hpp"

namespace msadet {

void ModelConfig::validate() const {
  if (masked_encoder) {
    throw ConfigError(msa_enabled ? "multi-scale attention cannot be combined with the masked encoder"
                                  : "the masked encoder variant is not implemented");
  }
  if (n_encoder_points == 0 || n_queries == 0 || n_classes == 0) {
    throw ConfigError("point, query and class counts must be positive");
  }
  if (n_dense_points != 2 * n_encoder_points) {
    throw ConfigError("n_dense_points must equal 2 * n_encoder_points");
  }
  if (n_encoder_points > n_raw_points) throw ConfigError("n_encoder_points exceeds n_raw_points");
  if (n_queries > n_encoder_points) throw ConfigError("n_queries exceeds n_encoder_points");
  attention().validate();
  if (msa_enabled && n_heads % 2 != 0) throw ConfigError("multi-scale attention needs an even head count");
  if (!(sa_radius > 0.0) || sa_group_cap == 0) throw ConfigError("set abstraction needs radius > 0 and cap >= 1");
  if (n_freqs == 0) throw ConfigError("n_freqs must be positive");
  wid.validate();
}

SceneGeometry prepare_geometry(std::span<const Vec3> points, const ModelConfig& cfg) {
  cfg.validate();
  const std::size_t needed = cfg.msa_enabled ? cfg.n_dense_points : cfg.n_encoder_points;
  if (points.size() < needed) {
    throw std::invalid_argument("scene has " + std::to_string(points.size()) + " points, model needs at least " +
                                std::to_string(needed));
  }
  SceneGeometry g;
  if (points.size() > cfg.n_raw_points) {
    g.raw = gather_points(points, farthest_point_sample(points, cfg.n_raw_points, lexicographic_min_index(points)));
  } else {
    g.raw.assign(points.begin(), points.end());
  }
  g.bounds = SceneBounds::of(g.raw);
  // Greedy FPS is prefix-stable: the first N picks of a 2N run are the N-point run.
  const auto order = farthest_point_sample(g.raw, needed, lexicographic_min_index(g.raw));
  const std::span<const std::size_t> enc_idx(order.data(), cfg.n_encoder_points);
  g.encoder_points = gather_points(g.raw, enc_idx);
  g.groups = ball_query(g.raw, enc_idx, cfg.sa_radius, cfg.sa_group_cap);

  const std::size_t cap = cfg.sa_group_cap;
  g.group_offsets = Tensor::zeros({enc_idx.size() * cap, 3});
  auto off = g.group_offsets.data();
  for (std::size_t c = 0; c < enc_idx.size(); ++c) {
    const Vec3& centre = g.raw[enc_idx[c]];
    for (std::size_t j = 0; j < cap; ++j) {
      const Vec3& p = g.raw[g.groups.indices[c * cap + j]];
      for (int a = 0; a < 3; ++a) off[(c * cap + j) * 3 + a] = (p[a] - centre[a]) / cfg.sa_radius;
    }
  }

  const std::size_t fdim = 6 * cfg.n_freqs;
  g.encoder_fourier = fourier_pos_encode(g.encoder_points, cfg.n_freqs, fdim, g.bounds);
  if (cfg.msa_enabled) {
    g.dense_points = gather_points(g.raw, order);
    g.dense_from_encoder = wid_weights(g.dense_points, g.encoder_points, cfg.wid);
    g.dense_fourier = fourier_pos_encode(g.dense_points, cfg.n_freqs, fdim, g.bounds);
  }
  g.query_points = gather_points(
      g.encoder_points,
      farthest_point_sample(g.encoder_points, cfg.n_queries, lexicographic_min_index(g.encoder_points)));
  g.query_fourier = fourier_pos_encode(g.query_points, cfg.n_freqs, fdim, g.bounds);
  return g;
}

Tensor set_abstraction_features(const Tensor& group_offsets, std::size_t group_cap, const MlpParams& mlp) {
  return max_pool_groups(apply(mlp, group_offsets), group_cap);
}

SetAbstractionOutput set_abstraction(std::span<const Vec3> points, std::size_t n_out, double radius,
                                     std::size_t group_cap, const MlpParams& mlp, std::size_t seed_index) {
  SetAbstractionOutput out;
  out.centers = farthest_point_sample(points, n_out, seed_index);
  out.points = gather_points(points, out.centers);
  out.groups = ball_query(points, out.centers, radius, group_cap);
  Tensor offsets = Tensor::zeros({n_out * group_cap, 3});
  auto off = offsets.data();
  for (std::size_t c = 0; c < n_out; ++c) {
    for (std::size_t j = 0; j < group_cap; ++j) {
      const Vec3& p = points[out.groups.indices[c * group_cap + j]];
      for (int a = 0; a < 3; ++a) off[(c * group_cap + j) * 3 + a] = (p[a] - out.points[c][a]) / radius;
    }
  }
  out.feats = set_abstraction_features(offsets, group_cap, mlp);
  return out;
}

Tensor encode(const Tensor& feats, const Tensor& pos, std::span<const EncoderLayerParams> layers) {
  Tensor x = feats;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    OpCounter::Stage stage("encoder." + std::to_string(i));
    const Tensor in = add(x, pos);
    x = layer_norm(add(x, mha(in, in, layers[i].self_attn)));
    x = layer_norm(add(x, apply(layers[i].ffn, x)));
  }
  return x;
}

Tensor decode(const Tensor& queries, const Tensor& memory, const Tensor& memory_pos, const Tensor& dense,
              const Tensor& dense_pos, std::span<const DecoderLayerParams> layers) {
  const bool wants_dense = !layers.empty() && layers[0].cross_msa.has_value();
  if (wants_dense != dense.defined()) {
    throw ConfigError(wants_dense ? "multi-scale decoder layer needs upsampled features"
                                  : "upsampled features given to a decoder without multi-scale attention");
  }
  Tensor t = queries;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    OpCounter::Stage stage("decoder." + std::to_string(i));
    const auto& layer = layers[i];
    t = layer_norm(add(t, mha(t, t, layer.self_attn)));
    const Tensor kv = add(memory, memory_pos);
    Tensor cross;
    if (layer.cross_msa) {
      cross = msa_dual(t, kv, add(dense, dense_pos), *layer.cross_msa);
    } else {
      cross = mha(t, kv, layer.cross_attn);
    }
    t = layer_norm(add(t, cross));
    t = layer_norm(add(t, apply(layer.ffn, t)));
  }
  return t;
}

Predictions predict_heads(const Tensor& dec_out, std::span<const Vec3> anchors, const HeadParams& heads) {
  if (dec_out.rank() != 2 || dec_out.shape()[0] != anchors.size()) {
    throw DimensionError("predict_heads: decoder output " + shape_to_string(dec_out.shape()) + " for " +
                         std::to_string(anchors.size()) + " anchors");
  }
  std::vector<double> a;
  a.reserve(anchors.size() * 3);
  for (const auto& p : anchors) a.insert(a.end(), p.begin(), p.end());
  Predictions out;
  out.logits = apply(heads.cls, dec_out);
  out.centers = add(Tensor::from_data({anchors.size(), 3}, std::move(a)), apply(heads.center, dec_out));
  out.sizes = exp(apply(heads.size, dec_out));
  return out;
}

namespace {

std::vector<double> class_probabilities(const Tensor& logits) {
  NoGradScope no_grad;
  const Tensor p = softmax_rows(logits);
  return {p.data().begin(), p.data().end()};
}

}  // namespace

std::vector<Box3D> decode_boxes(const Predictions& preds) {
  const std::size_t q = preds.logits.shape()[0], c1 = preds.logits.shape()[1];
  const auto probs = class_probabilities(preds.logits);
  std::vector<Box3D> boxes(q);
  for (std::size_t i = 0; i < q; ++i) {
    const double* p = probs.data() + i * c1;
    const std::size_t best = static_cast<std::size_t>(std::max_element(p, p + c1 - 1) - p);
    boxes[i].class_id = best;
    boxes[i].score = p[best];
    for (int a = 0; a < 3; ++a) {
      boxes[i].center[a] = preds.centers(i, a);
      boxes[i].size[a] = preds.sizes(i, a);
    }
  }
  return boxes;
}

std::vector<double> matching_cost(const Predictions& preds, std::span<const Box3D> gts, const LossWeights& w) {
  const std::size_t q = preds.logits.shape()[0], c1 = preds.logits.shape()[1];
  const auto probs = class_probabilities(preds.logits);
  std::vector<double> cost(q * gts.size());
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gts[g].class_id + 1 >= c1) throw std::out_of_range("ground-truth class outside the model's classes");
      double lc = 0.0, ls = 0.0;
      for (int a = 0; a < 3; ++a) {
        lc += std::abs(preds.centers(i, a) - gts[g].center[a]);
        ls += std::abs(preds.sizes(i, a) - gts[g].size[a]);
      }
      cost[i * gts.size() + g] = w.cls * (1.0 - probs[i * c1 + gts[g].class_id]) + w.center * lc + w.size * ls;
    }
  }
  return cost;
}

Tensor detection_loss(const Predictions& preds, std::span<const Box3D> gts, const MatchResult& match,
                      const LossWeights& w) {
  const std::size_t q = preds.logits.shape()[0];
  const std::size_t no_object = preds.logits.shape()[1] - 1;
  if (match.assignment.size() != q) throw DimensionError("detection_loss: match does not cover every query");
  std::vector<std::size_t> targets(q, no_object);
  std::vector<std::size_t> matched;
  std::vector<double> gt_centers, gt_sizes;
  for (std::size_t i = 0; i < q; ++i) {
    if (!match.assignment[i]) continue;
    const Box3D& gt = gts[*match.assignment[i]];
    targets[i] = gt.class_id;
    matched.push_back(i);
    gt_centers.insert(gt_centers.end(), gt.center.begin(), gt.center.end());
    gt_sizes.insert(gt_sizes.end(), gt.size.begin(), gt.size.end());
  }
  Tensor loss = scale(cross_entropy(preds.logits, targets), w.cls);
  if (!matched.empty()) {
    const Tensor centers = Tensor::from_data({matched.size(), 3}, std::move(gt_centers));
    const Tensor sizes = Tensor::from_data({matched.size(), 3}, std::move(gt_sizes));
    loss = add(loss, scale(l1_loss(gather_rows(preds.centers, matched), centers), w.center));
    loss = add(loss, scale(l1_loss(gather_rows(preds.sizes, matched), sizes), w.size));
  }
  return loss;
}

Detector::Detector(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)), seed_(seed), params_(seed) {
  cfg_.validate();
  const std::size_t d = cfg_.d_model;
  const std::size_t fdim = 6 * cfg_.n_freqs;
  const MHAConfig att = cfg_.attention();
  sa_mlp_ = params_.add_mlp("sa.mlp", 3, cfg_.sa_hidden, d);
  pos_proj_ = params_.add_linear("pos.proj", fdim, d);
  query_proj_ = params_.add_mlp("query.proj", fdim, d, d);
  for (std::size_t i = 0; i < cfg_.n_encoder_layers; ++i) {
    const std::string p = "encoder." + std::to_string(i);
    encoder_.push_back({AttentionParams::create(params_, p + ".self_attn", att),
                        params_.add_mlp(p + ".ffn", d, cfg_.ffn_hidden, d)});
  }
  if (cfg_.msa_enabled) upsample_proj_ = params_.add_mlp("upsample.proj", d, d, d);
  for (std::size_t i = 0; i < cfg_.n_decoder_layers; ++i) {
    const std::string p = "decoder." + std::to_string(i);
    DecoderLayerParams layer;
    layer.self_attn = AttentionParams::create(params_, p + ".self_attn", att);
    if (i == 0 && cfg_.msa_enabled) {
      layer.cross_msa = MSAParams::create(params_, p + ".cross_attn", att);
    } else {
      layer.cross_attn = AttentionParams::create(params_, p + ".cross_attn", att);
    }
    layer.ffn = params_.add_mlp(p + ".ffn", d, cfg_.ffn_hidden, d);
    decoder_.push_back(std::move(layer));
  }
  heads_.cls = params_.add_mlp("heads.cls", d, d, cfg_.n_classes + 1);
  heads_.center = params_.add_mlp("heads.center", d, d, 3);
  heads_.size = params_.add_mlp("heads.size", d, d, 3);
}

Predictions Detector::forward(const SceneGeometry& geom) const {
  Tensor feats;
  {
    OpCounter::Stage stage("sa");
    feats = set_abstraction_features(geom.group_offsets, cfg_.sa_group_cap, sa_mlp_);
  }
  Tensor pos;
  {
    OpCounter::Stage stage("pos");
    pos = apply(pos_proj_, geom.encoder_fourier);
  }
  const Tensor memory = encode(feats, pos, encoder_);
  Tensor dense, dense_pos;
  if (cfg_.msa_enabled) {
    OpCounter::Stage stage("decoder.0");
    dense = apply(*upsample_proj_, wid_interpolate(geom.dense_from_encoder, memory));
    dense_pos = apply(pos_proj_, geom.dense_fourier);
  }
  Tensor queries;
  {
    OpCounter::Stage stage("queries");
    queries = apply(query_proj_, geom.query_fourier);
  }
  const Tensor out = decode(queries, memory, pos, dense, dense_pos, decoder_);
  OpCounter::Stage stage("heads");
  return predict_heads(out, geom.query_points, heads_);
}

}  // namespace msadet
