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
#include "msadet/gradcheck_suite.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "msadet/attention.hpp"
#include "msadet/geometry.hpp"
#include "msadet/model.hpp"
#include "msadet/nn.hpp"

namespace msadet {
namespace {

// Values in ±[0.1, 1): no element sits near zero.
Tensor away_from_zero(Shape shape, std::mt19937_64& rng) {
  Tensor t = uniform(std::move(shape), rng, 0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  for (auto& v : t.data()) v = sign(rng) ? v : -v;
  return t;
}

// Contracts a non-scalar output against fixed random weights.
Tensor project(const Tensor& out, const Tensor& weights) { return sum(mul(out, weights)); }

std::vector<Vec3> random_points(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  return pts;
}

class Suite {
 public:
  Suite(std::uint64_t seed, double h) : rng_(seed), h_(h) {}

  // f maps the inputs to a tensor of any shape; it is contracted to a scalar.
  void check(std::string name, std::vector<Tensor> inputs, const std::function<Tensor(std::span<const Tensor>)>& f) {
    Shape out_shape;
    {
      NoGradScope no_grad;
      out_shape = f(inputs).shape();
    }
    const Tensor weights = uniform(out_shape, rng_, -1.0, 1.0);
    const bool scalar = weights.numel() == 1;
    LossFn loss = [&](std::span<const Tensor> in) {
      Tensor out = f(in);
      return scalar ? out : project(out, weights);
    };
    cases_.push_back({std::move(name), check_gradients(loss, inputs, h_)});
  }

  std::mt19937_64& rng() { return rng_; }
  std::vector<GradCheckCase> take() { return std::move(cases_); }

 private:
  std::mt19937_64 rng_;
  double h_;
  std::vector<GradCheckCase> cases_;
};

void op_cases(Suite& s) {
  auto& rng = s.rng();
  auto r = [&](Shape shape) { return uniform(std::move(shape), rng, -1.0, 1.0); };

  s.check("matmul", {r({4, 3}), r({3, 5})}, [](auto in) { return matmul(in[0], in[1]); });
  s.check("matmul_nt", {r({4, 3}), r({5, 3})}, [](auto in) { return matmul_nt(in[0], in[1]); });
  s.check("add", {r({3, 4}), r({3, 4})}, [](auto in) { return add(in[0], in[1]); });
  s.check("sub", {r({3, 4}), r({3, 4})}, [](auto in) { return sub(in[0], in[1]); });
  s.check("mul", {r({3, 4}), r({3, 4})}, [](auto in) { return mul(in[0], in[1]); });
  s.check("scale", {r({3, 4})}, [](auto in) { return scale(in[0], -0.7); });
  s.check("relu", {away_from_zero({4, 5}, rng)}, [](auto in) { return relu(in[0]); });
  s.check("exp", {r({3, 4})}, [](auto in) { return exp(in[0]); });
  s.check("softmax_rows", {r({4, 6})}, [](auto in) { return softmax_rows(in[0]); });
  s.check("layer_norm", {r({4, 6})}, [](auto in) { return layer_norm(in[0]); });
  s.check("linear", {r({4, 3}), r({3, 5}), r({5})}, [](auto in) { return linear(in[0], in[1], in[2]); });
  s.check("linear_no_bias", {r({4, 3}), r({3, 5})}, [](auto in) { return linear(in[0], in[1], Tensor{}); });
  s.check("concat_channels", {r({3, 2}), r({3, 4}), r({3, 1})}, [](auto in) { return concat_channels(in); });
  s.check("slice_channels", {r({3, 6})}, [](auto in) { return slice_channels(in[0], 1, 4); });

  std::uniform_int_distribution<std::size_t> pick(0, 5);
  std::vector<std::size_t> idx(12);
  for (auto& i : idx) i = pick(rng);
  std::vector<double> w(12);
  std::uniform_real_distribution<double> uw(0.0, 1.0);
  for (auto& v : w) v = uw(rng);
  s.check("weighted_gather", {r({6, 3})}, [=](auto in) { return weighted_gather(in[0], idx, w, 3); });
  s.check("gather_rows", {r({6, 3})}, [=](auto in) { return gather_rows(in[0], idx); });

  // Distinct values spaced well beyond the difference step.
  Tensor pool_in = Tensor::zeros({8, 3});
  std::vector<double> levels(24);
  for (std::size_t i = 0; i < levels.size(); ++i) levels[i] = 0.05 * static_cast<double>(i);
  std::shuffle(levels.begin(), levels.end(), rng);
  std::copy(levels.begin(), levels.end(), pool_in.data().begin());
  s.check("max_pool_groups", {pool_in}, [](auto in) { return max_pool_groups(in[0], 4); });

  s.check("sum", {r({3, 4})}, [](auto in) { return sum(in[0]); });
  const std::vector<std::size_t> targets{0, 3, 2, 3};
  s.check("cross_entropy", {r({4, 4})}, [=](auto in) { return cross_entropy(in[0], targets); });
  Tensor a = r({3, 4});
  Tensor offset = away_from_zero({3, 4}, rng);
  s.check("l1_loss", {a, add(a, offset).detach()}, [](auto in) { return l1_loss(in[0], in[1]); });
}

void attention_cases(Suite& s) {
  auto& rng = s.rng();
  auto r = [&](Shape shape) { return uniform(std::move(shape), rng, -1.0, 1.0); };
  s.check("sdpa", {r({3, 4}), r({5, 4}), r({5, 2})}, [](auto in) { return sdpa(in[0], in[1], in[2]); });

  const MHAConfig cfg{8, 4};
  ParamStore store(rng());
  const auto attn = AttentionParams::create(store, "attn", cfg);
  const auto msa = MSAParams::create(store, "msa", cfg);
  std::vector<Tensor> mha_inputs{r({3, 8}), r({5, 8})};
  for (const auto& [name, t] : store.entries()) {
    if (name.rfind("attn.", 0) == 0) mha_inputs.push_back(t);
  }
  s.check("mha", mha_inputs, [&](auto in) { return mha(in[0], in[1], attn); });

  std::vector<Tensor> msa_inputs{r({3, 8}), r({5, 8}), r({7, 8})};
  for (const auto& [name, t] : store.entries()) {
    if (name.rfind("msa.", 0) == 0) msa_inputs.push_back(t);
  }
  s.check("msa_dual", msa_inputs, [&](auto in) { return msa_dual(in[0], in[1], in[2], msa); });
}

void geometry_cases(Suite& s) {
  auto& rng = s.rng();
  const auto src = random_points(6, rng);
  const auto dst = random_points(9, rng);
  const WIDConfig cfg;
  s.check("wid_interpolate", {uniform({6, 4}, rng, -1.0, 1.0)},
          [&](auto in) { return wid_interpolate(dst, src, in[0], cfg); });

  ParamStore store(rng());
  const auto mlp = store.add_mlp("up", 4, 4, 4);
  const auto dense = random_points(12, rng);
  std::vector<Tensor> inputs{uniform({6, 4}, rng, -1.0, 1.0)};
  for (const auto& [name, t] : store.entries()) inputs.push_back(t);
  s.check("upsample_features", inputs, [&](auto in) { return upsample_features(src, in[0], dense, mlp, cfg); });
}

void model_cases(Suite& s) {
  auto& rng = s.rng();
  ModelConfig cfg;
  cfg.n_raw_points = 64;
  cfg.n_encoder_points = 16;
  cfg.n_dense_points = 32;
  cfg.d_model = 8;
  cfg.n_heads = 2;
  cfg.n_encoder_layers = 1;
  cfg.n_decoder_layers = 2;
  cfg.n_queries = 4;
  cfg.n_classes = 3;
  cfg.sa_radius = 0.6;
  cfg.sa_group_cap = 4;
  cfg.sa_hidden = 8;
  cfg.ffn_hidden = 8;
  cfg.n_freqs = 1;

  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<Vec3> pts(cfg.n_raw_points);
  for (auto& p : pts) p = {u(rng), u(rng), 0.5 * u(rng)};
  const std::vector<Box3D> gts{{{0.5, 0.5, 0.3}, {0.4, 0.6, 0.5}, 1, 1.0}, {{1.4, 1.2, 0.4}, {0.8, 0.5, 0.6}, 2, 1.0}};

  for (bool msa_on : {false, true}) {
    cfg.msa_enabled = msa_on;
    Detector model(cfg, rng());
    // Zero-initialised biases put the centre rows of every group (offset 0)
    // exactly on the ReLU kink; check at a generic point instead.
    for (auto& [name, t] : model.params().entries()) {
      if (name.ends_with(".bias")) {
        const Tensor b = away_from_zero(t.shape(), rng);
        std::copy(b.data().begin(), b.data().end(), Tensor(t).data().begin());
      }
    }
    const auto geom = model.prepare(pts);
    const auto w = model.loss_weights();
    MatchResult match;
    {
      NoGradScope no_grad;
      const auto preds = model.forward(geom);
      match = hungarian_match(matching_cost(preds, gts, w), cfg.n_queries, gts.size());
    }
    std::vector<Tensor> params;
    for (const auto& [name, t] : model.params().entries()) params.push_back(t);
    // Matching is held fixed so the loss is smooth in the parameters.
    s.check(msa_on ? "detector_msa" : "detector_baseline", params,
            [&](auto) { return detection_loss(model.forward(geom), gts, match, w); });
  }
}

}  // namespace

std::vector<GradCheckCase> run_gradcheck_suite(std::uint64_t seed, double h) {
  Suite suite(seed, h);
  op_cases(suite);
  attention_cases(suite);
  geometry_cases(suite);
  model_cases(suite);
  return suite.take();
}

}  // namespace msadet
