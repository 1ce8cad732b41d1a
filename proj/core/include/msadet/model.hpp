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

// Set-prediction point-cloud detector: set-abstraction pre-encoder,
// transformer encoder, transformer decoder whose first cross-attention can be
// replaced by dual key-value multi-scale attention over upsampled features,
// and box prediction heads.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msadet/attention.hpp"
#include "msadet/geometry.hpp"
#include "msadet/matching.hpp"
#include "msadet/nn.hpp"
#include "msadet/tensor.hpp"
#include "msadet/types.hpp"

namespace msadet {

struct ModelConfig {
  std::size_t n_raw_points = 2048;
  std::size_t n_encoder_points = 512;
  std::size_t n_dense_points = 1024;
  std::size_t d_model = 64;
  std::size_t n_heads = 4;
  std::size_t n_encoder_layers = 3;
  std::size_t n_decoder_layers = 4;
  std::size_t n_queries = 16;
  std::size_t n_classes = 6;
  bool msa_enabled = true;
  /// Masked-encoder variant. Not implemented; rejected together with MSA.
  bool masked_encoder = false;

  double sa_radius = 0.4;
  std::size_t sa_group_cap = 16;
  std::size_t sa_hidden = 64;
  std::size_t ffn_hidden = 128;
  std::size_t n_freqs = 4;
  WIDConfig wid;

  double lambda_cls = 1.0;
  double lambda_center = 5.0;
  double lambda_size = 1.0;
  double score_threshold = 0.05;

  MHAConfig attention() const { return {d_model, n_heads}; }
  void validate() const;
};

/// Everything about a scene that depends only on its coordinates: sampled
/// point sets, neighbourhoods, interpolation weights and Fourier features.
struct SceneGeometry {
  SceneBounds bounds;
  std::vector<Vec3> raw;
  std::vector<Vec3> encoder_points;
  BallGroups groups;     // indices into raw
  Tensor group_offsets;  // (N * cap) x 3, (p - centre) / radius
  std::vector<Vec3> dense_points;
  InterpolationWeights dense_from_encoder;
  std::vector<Vec3> query_points;
  Tensor encoder_fourier;
  Tensor dense_fourier;
  Tensor query_fourier;
};

SceneGeometry prepare_geometry(std::span<const Vec3> points, const ModelConfig& cfg);

struct EncoderLayerParams {
  AttentionParams self_attn;
  MlpParams ffn;
};

struct DecoderLayerParams {
  AttentionParams self_attn;
  AttentionParams cross_attn;          // unused when cross_msa is set
  std::optional<MSAParams> cross_msa;  // first layer only, when MSA is enabled
  MlpParams ffn;
};

struct HeadParams {
  MlpParams cls;     // d -> n_classes + 1 (last = no object)
  MlpParams center;  // d -> 3, offset from the query anchor
  MlpParams size;    // d -> 3, log extents
};

struct SetAbstractionOutput {
  std::vector<std::size_t> centers;
  std::vector<Vec3> points;
  BallGroups groups;
  Tensor feats;
};

/// PointNet++-style set abstraction on raw coordinates: FPS centres, ball
/// grouping, shared MLP over radius-normalised offsets, per-group max-pool.
SetAbstractionOutput set_abstraction(std::span<const Vec3> points, std::size_t n_out, double radius,
                                     std::size_t group_cap, const MlpParams& mlp, std::size_t seed_index = 0);
/// Same stage on precomputed offsets ((G * cap) x 3).
Tensor set_abstraction_features(const Tensor& group_offsets, std::size_t group_cap, const MlpParams& mlp);

/// Post-norm transformer encoder. `pos` is added to the attention inputs.
Tensor encode(const Tensor& feats, const Tensor& pos, std::span<const EncoderLayerParams> layers);

/// Transformer decoder. Layer 1 uses multi-scale attention over (memory,
/// dense) when its params carry cross_msa; `dense` must be defined exactly then.
Tensor decode(const Tensor& queries, const Tensor& memory, const Tensor& memory_pos, const Tensor& dense,
              const Tensor& dense_pos, std::span<const DecoderLayerParams> layers);

struct Predictions {
  Tensor logits;   // Qn x (C + 1)
  Tensor centers;  // Qn x 3
  Tensor sizes;    // Qn x 3, strictly positive
};

Predictions predict_heads(const Tensor& dec_out, std::span<const Vec3> anchors, const HeadParams& heads);

/// Candidate boxes (class = argmax over object classes, score = its
/// probability) for every query.
std::vector<Box3D> decode_boxes(const Predictions& preds);

struct LossWeights {
  double cls = 1.0;
  double center = 5.0;
  double size = 1.0;
};

/// cost[q, g] = w.cls * (1 - p_q(class_g)) + w.center * L1(center) + w.size * L1(size)
std::vector<double> matching_cost(const Predictions& preds, std::span<const Box3D> gts, const LossWeights& w);

/// Sum over queries of class cross-entropy (matched -> GT class, unmatched ->
/// "no object"), plus weighted L1 center and size terms for matched queries.
Tensor detection_loss(const Predictions& preds, std::span<const Box3D> gts, const MatchResult& match,
                      const LossWeights& w);

class Detector {
 public:
  Detector(ModelConfig cfg, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return cfg_; }
  ParamStore& params() noexcept { return params_; }
  const ParamStore& params() const noexcept { return params_; }
  std::uint64_t seed() const noexcept { return seed_; }

  SceneGeometry prepare(std::span<const Vec3> points) const { return prepare_geometry(points, cfg_); }

  /// Records onto the active graph when one is set. Op-count stages are
  /// "sa", "encoder.<i>", "decoder.<i>" and "heads"; the upsampling that
  /// feeds the first decoder layer is counted under "decoder.0".
  Predictions forward(const SceneGeometry& geom) const;

  LossWeights loss_weights() const { return {cfg_.lambda_cls, cfg_.lambda_center, cfg_.lambda_size}; }

 private:
  ModelConfig cfg_;
  std::uint64_t seed_;
  ParamStore params_;
  MlpParams sa_mlp_;
  LinearParams pos_proj_;
  MlpParams query_proj_;
  std::vector<EncoderLayerParams> encoder_;
  std::optional<MlpParams> upsample_proj_;
  std::vector<DecoderLayerParams> decoder_;
  HeadParams heads_;
};

}  // namespace msadet
