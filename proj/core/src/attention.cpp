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
#include "msadet/attention.hpp"

#include <cmath>
#include <numbers>

#include "msadet/errors.hpp"

namespace msadet {
namespace {

void require_width(const Tensor& x, std::size_t d, const char* what) {
  if (!x.defined() || x.rank() != 2 || x.shape()[1] != d) {
    throw DimensionError(std::string(what) + " " + (x.defined() ? shape_to_string(x.shape()) : "[]") +
                         " does not have width " + std::to_string(d));
  }
}

std::vector<Tensor> head_weights(ParamStore& store, const std::string& prefix, std::size_t first,
                                 std::size_t count, const MHAConfig& cfg) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.d_model));
  std::vector<Tensor> out;
  for (std::size_t i = first; i < first + count; ++i) {
    out.push_back(store.add_uniform(prefix + ".h" + std::to_string(i), {cfg.d_model, cfg.head_dim()}, bound));
  }
  return out;
}

Tensor output_projection(ParamStore& store, const std::string& name, const MHAConfig& cfg) {
  return store.add_uniform(name, {cfg.d_model, cfg.d_model}, 1.0 / std::sqrt(static_cast<double>(cfg.d_model)));
}

// Attends each head's slice of the projected queries over its slice of the
// projected keys/values and returns the per-head outputs in order.
void attend_heads(const Tensor& q, std::size_t q_offset, const Tensor& k, const Tensor& v, std::size_t heads,
                  std::size_t head_dim, std::vector<Tensor>& out) {
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t qb = (q_offset + h) * head_dim, kb = h * head_dim;
    out.push_back(sdpa(slice_channels(q, qb, qb + head_dim), slice_channels(k, kb, kb + head_dim),
                       slice_channels(v, kb, kb + head_dim)));
  }
}

}  // namespace

void MHAConfig::validate() const {
  if (d_model == 0 || n_heads == 0) throw ConfigError("attention widths must be positive");
  if (d_model % n_heads != 0) {
    throw ConfigError("d_model " + std::to_string(d_model) + " is not divisible by " +
                      std::to_string(n_heads) + " heads");
  }
}

AttentionParams AttentionParams::create(ParamStore& store, const std::string& prefix, const MHAConfig& cfg) {
  cfg.validate();
  AttentionParams p;
  p.wq = head_weights(store, prefix + ".wq", 0, cfg.n_heads, cfg);
  p.wk = head_weights(store, prefix + ".wk", 0, cfg.n_heads, cfg);
  p.wv = head_weights(store, prefix + ".wv", 0, cfg.n_heads, cfg);
  p.wo = output_projection(store, prefix + ".wo", cfg);
  return p;
}

MSAParams MSAParams::create(ParamStore& store, const std::string& prefix, const MHAConfig& cfg) {
  cfg.validate();
  if (cfg.n_heads % 2 != 0) {
    throw ConfigError("multi-scale attention needs an even head count, got " + std::to_string(cfg.n_heads));
  }
  const std::size_t half = cfg.n_heads / 2;
  MSAParams p;
  p.wq = head_weights(store, prefix + ".wq", 0, cfg.n_heads, cfg);
  p.wk1 = head_weights(store, prefix + ".branch1.wk", 0, half, cfg);
  p.wv1 = head_weights(store, prefix + ".branch1.wv", 0, half, cfg);
  p.wk2 = head_weights(store, prefix + ".branch2.wk", half, half, cfg);
  p.wv2 = head_weights(store, prefix + ".branch2.wv", half, half, cfg);
  p.wo = output_projection(store, prefix + ".wo", cfg);
  return p;
}

MSAParams MSAParams::tied(const AttentionParams& p) {
  const std::size_t h = p.n_heads();
  if (h % 2 != 0) throw ConfigError("multi-scale attention needs an even head count");
  MSAParams m;
  m.wq = p.wq;
  m.wk1.assign(p.wk.begin(), p.wk.begin() + static_cast<std::ptrdiff_t>(h / 2));
  m.wv1.assign(p.wv.begin(), p.wv.begin() + static_cast<std::ptrdiff_t>(h / 2));
  m.wk2.assign(p.wk.begin() + static_cast<std::ptrdiff_t>(h / 2), p.wk.end());
  m.wv2.assign(p.wv.begin() + static_cast<std::ptrdiff_t>(h / 2), p.wv.end());
  m.wo = p.wo;
  return m;
}

Tensor attention_weights(const Tensor& q, const Tensor& k) {
  if (!q.defined() || !k.defined() || q.rank() != 2 || k.rank() != 2 || q.shape()[1] != k.shape()[1]) {
    throw DimensionError("attention: query " + shape_to_string(q.shape()) + " and key " +
                         shape_to_string(k.shape()) + " widths differ");
  }
  const double s = 1.0 / std::sqrt(static_cast<double>(q.shape()[1]));
  // Scaling the queries rather than the logits is the same product, cheaper.
  return softmax_rows(matmul_nt(scale(q, s), k));
}

Tensor sdpa(const Tensor& q, const Tensor& k, const Tensor& v) {
  if (!v.defined() || v.rank() != 2 || !k.defined() || v.shape()[0] != k.shape()[0]) {
    throw DimensionError("attention: key " + shape_to_string(k.shape()) + " and value " +
                         shape_to_string(v.shape()) + " row counts differ");
  }
  return matmul(attention_weights(q, k), v);
}

Tensor mha(const Tensor& x_q, const Tensor& x_kv, const AttentionParams& p) {
  const std::size_t d = p.wo.shape()[0];
  require_width(x_q, d, "mha query input");
  require_width(x_kv, d, "mha key/value input");
  const std::size_t h = p.n_heads();
  const std::size_t hd = d / h;
  const Tensor q = matmul(x_q, concat_channels(p.wq));
  const Tensor k = matmul(x_kv, concat_channels(p.wk));
  const Tensor v = matmul(x_kv, concat_channels(p.wv));
  std::vector<Tensor> heads;
  attend_heads(q, 0, k, v, h, hd, heads);
  return matmul(concat_channels(heads), p.wo);
}

Tensor msa_dual(const Tensor& q_in, const Tensor& kv1, const Tensor& kv2, const MSAParams& p) {
  const std::size_t h = p.n_heads();
  if (h % 2 != 0 || p.wk1.size() != h / 2 || p.wk2.size() != h / 2) {
    throw ConfigError("multi-scale attention needs an even head count split evenly across branches");
  }
  const std::size_t d = p.wo.shape()[0];
  require_width(q_in, d, "msa query input");
  require_width(kv1, d, "msa first key/value input");
  require_width(kv2, d, "msa second key/value input");
  const std::size_t hd = d / h;
  const Tensor q = matmul(q_in, concat_channels(p.wq));
  std::vector<Tensor> heads;
  attend_heads(q, 0, matmul(kv1, concat_channels(p.wk1)), matmul(kv1, concat_channels(p.wv1)), h / 2, hd, heads);
  attend_heads(q, h / 2, matmul(kv2, concat_channels(p.wk2)), matmul(kv2, concat_channels(p.wv2)), h / 2, hd,
               heads);
  return matmul(concat_channels(heads), p.wo);
}

SceneBounds SceneBounds::of(std::span<const Vec3> points) {
  SceneBounds b;
  if (points.empty()) return b;
  b.lo = b.hi = points[0];
  for (const auto& p : points) {
    for (int a = 0; a < 3; ++a) {
      b.lo[a] = std::min(b.lo[a], p[a]);
      b.hi[a] = std::max(b.hi[a], p[a]);
    }
  }
  return b;
}

Tensor fourier_pos_encode(std::span<const Vec3> points, std::size_t n_freqs, std::size_t d_out,
                          const SceneBounds& bounds) {
  if (d_out < 6 * n_freqs) {
    throw DimensionError("fourier_pos_encode: width " + std::to_string(d_out) + " < 6 x " +
                         std::to_string(n_freqs) + " frequencies");
  }
  Tensor out = Tensor::zeros({points.size(), d_out});
  auto data = out.data();
  for (std::size_t i = 0; i < points.size(); ++i) {
    Vec3 x{};
    for (int a = 0; a < 3; ++a) {
      const double half = 0.5 * (bounds.hi[a] - bounds.lo[a]);
      const double mid = 0.5 * (bounds.hi[a] + bounds.lo[a]);
      x[a] = half > 0.0 ? (points[i][a] - mid) / half : 0.0;
    }
    double* row = data.data() + i * d_out;
    for (std::size_t f = 0; f < n_freqs; ++f) {
      const double w = std::ldexp(std::numbers::pi / 2.0, static_cast<int>(f));
      for (int a = 0; a < 3; ++a) {
        row[6 * f + a] = std::sin(w * x[a]);
        row[6 * f + 3 + a] = std::cos(w * x[a]);
      }
    }
  }
  return out;
}

Tensor fourier_pos_encode(std::span<const Vec3> points, std::size_t n_freqs, std::size_t d_out) {
  return fourier_pos_encode(points, n_freqs, d_out, SceneBounds::of(points));
}

}  // namespace msadet
