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
// Scaled dot-product attention, multi-head attention and the dual key-value
// multi-scale attention layer.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "msadet/geometry.hpp"
#include "msadet/nn.hpp"
#include "msadet/tensor.hpp"

namespace msadet {

struct MHAConfig {
  std::size_t d_model = 256;
  std::size_t n_heads = 8;

  std::size_t head_dim() const { return d_model / n_heads; }
  void validate() const;
};

/// Per-head projections W^q_i, W^k_i, W^v_i (d_model x head_dim) and the
/// output projection W^o (d_model x d_model).
struct AttentionParams {
  std::vector<Tensor> wq, wk, wv;
  Tensor wo;

  std::size_t n_heads() const { return wq.size(); }
  static AttentionParams create(ParamStore& store, const std::string& prefix, const MHAConfig& cfg);
};

/// One shared query projection per head; heads [0, h/2) attend over the first
/// key-value set, heads [h/2, h) over the second.
struct MSAParams {
  std::vector<Tensor> wq;
  std::vector<Tensor> wk1, wv1;
  std::vector<Tensor> wk2, wv2;
  Tensor wo;

  std::size_t n_heads() const { return wq.size(); }
  static MSAParams create(ParamStore& store, const std::string& prefix, const MHAConfig& cfg);
  /// Shares storage with `p`: heads [0, h/2) become branch 1, the rest branch 2.
  static MSAParams tied(const AttentionParams& p);
};

/// softmax_rows(q kᵀ / sqrt(d_h))
Tensor attention_weights(const Tensor& q, const Tensor& k);
/// softmax_rows(q kᵀ / sqrt(d_h)) v
Tensor sdpa(const Tensor& q, const Tensor& k, const Tensor& v);
Tensor mha(const Tensor& x_q, const Tensor& x_kv, const AttentionParams& p);
Tensor msa_dual(const Tensor& q_in, const Tensor& kv1, const Tensor& kv2, const MSAParams& p);

struct SceneBounds {
  Vec3 lo{-1.0, -1.0, -1.0};
  Vec3 hi{1.0, 1.0, 1.0};

  static SceneBounds of(std::span<const Vec3> points);
};

/// Deterministic sin/cos features. Coordinates are mapped to [-1, 1] per axis
/// using `bounds`; for frequency f = 0..n_freqs-1 the row holds
/// sin(2^f·π/2·x̂) for x, y, z followed by the matching cosines, and the
/// remainder up to `d_out` is zero.
Tensor fourier_pos_encode(std::span<const Vec3> points, std::size_t n_freqs, std::size_t d_out,
                          const SceneBounds& bounds);
Tensor fourier_pos_encode(std::span<const Vec3> points, std::size_t n_freqs, std::size_t d_out);

}  // namespace msadet
