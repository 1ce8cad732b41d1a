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
#include "msadet/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "msadet/errors.hpp"

namespace msadet {

PreparedScene prepare_scene(const Detector& model, const Scene& scene) {
  return {scene.id, model.prepare(scene.points), scene.boxes};
}

void MomentumSgd::step(ParamStore& params) {
  const auto& entries = params.entries();
  if (velocity_.size() != entries.size()) {
    velocity_.clear();
    for (const auto& [_, t] : entries) velocity_.emplace_back(t.numel(), 0.0);
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Tensor t = entries[i].second;
    if (!t.has_grad()) continue;
    auto g = t.grad();
    auto p = t.data();
    auto& v = velocity_[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      v[j] = momentum_ * v[j] + g[j];
      p[j] -= lr_ * v[j];
    }
  }
}

void Adam::step(ParamStore& params) {
  const auto& entries = params.entries();
  if (m_.size() != entries.size()) {
    m_.clear();
    v_.clear();
    for (const auto& [_, t] : entries) {
      m_.emplace_back(t.numel(), 0.0);
      v_.emplace_back(t.numel(), 0.0);
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Tensor t = entries[i].second;
    if (!t.has_grad()) continue;
    auto g = t.grad();
    auto p = t.data();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
      p[j] -= lr_ * (m[j] / c1) / (std::sqrt(v[j] / c2) + epsilon_);
    }
  }
}

std::unique_ptr<Optimizer> make_optimizer(const TrainConfig& cfg) {
  if (cfg.optimizer == OptimizerKind::kAdam) return std::make_unique<Adam>(cfg.lr, cfg.momentum);
  return std::make_unique<MomentumSgd>(cfg.lr, cfg.momentum);
}

namespace {

std::string dump_step(const Detector& model, std::span<const PreparedScene* const> batch,
                      const std::vector<double>& losses) {
  std::ostringstream os;
  os.precision(17);
  os << "non-finite loss\n";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    os << "scene " << batch[i]->id << " raw_points=" << batch[i]->geometry.raw.size()
       << " boxes=" << batch[i]->boxes.size() << " loss=" << (i < losses.size() ? losses[i] : NAN) << '\n';
  }
  for (const auto& [name, t] : model.params().entries()) {
    double norm = 0.0;
    bool finite = true;
    for (double v : t.data()) {
      norm += v * v;
      finite = finite && std::isfinite(v);
    }
    if (!finite) os << "param " << name << " has non-finite values\n";
    else os << "param " << name << " l2=" << std::sqrt(norm) << '\n';
  }
  return os.str();
}

}  // namespace

StepResult train_step(Detector& model, std::span<const PreparedScene* const> batch, Optimizer& opt,
                      double grad_clip) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  ParamStore& params = model.params();
  params.zero_grad();
  const double inv = 1.0 / static_cast<double>(batch.size());
  std::vector<double> losses;
  for (const PreparedScene* scene : batch) {
    GradGraph graph;
    GradGraph::Scope scope(graph);
    const Predictions preds = model.forward(scene->geometry);
    // A non-finite prediction would poison the assignment; report it as divergence.
    for (const Tensor* t : {&preds.logits, &preds.centers, &preds.sizes}) {
      for (double v : t->data()) {
        if (!std::isfinite(v)) {
          losses.push_back(NAN);
          throw TrainingError(dump_step(model, batch, losses));
        }
      }
    }
    const MatchResult match =
        hungarian_match(matching_cost(preds, scene->boxes, model.loss_weights()), preds.logits.shape()[0],
                        scene->boxes.size());
    const Tensor loss = scale(detection_loss(preds, scene->boxes, match, model.loss_weights()), inv);
    losses.push_back(loss.item() / inv);
    if (!std::isfinite(loss.item())) throw TrainingError(dump_step(model, batch, losses));
    graph.backward(loss);
  }
  StepResult r;
  r.loss = std::accumulate(losses.begin(), losses.end(), 0.0) * inv;
  double sq = 0.0;
  for (const auto& [_, t] : params.entries()) {
    for (double g : t.grad()) sq += g * g;
  }
  r.grad_norm = std::sqrt(sq);
  if (!std::isfinite(r.grad_norm)) throw TrainingError(dump_step(model, batch, losses));
  if (grad_clip > 0.0 && r.grad_norm > grad_clip) {
    const double f = grad_clip / r.grad_norm;
    for (const auto& [_, t] : params.entries()) {
      if (!t.has_grad()) continue;
      Tensor handle = t;
      for (double& g : handle.mutable_grad()) g *= f;
    }
  }
  opt.step(params);
  return r;
}

DetectionResult infer(const Detector& model, const PreparedScene& scene) {
  const auto start = std::chrono::steady_clock::now();
  NoGradScope no_grad;
  const Predictions preds = model.forward(scene.geometry);
  const auto candidates = decode_boxes(preds);
  DetectionResult out;
  out.scene_id = scene.id;
  out.n_candidates = candidates.size();
  for (const auto& b : candidates) {
    if (b.score >= model.config().score_threshold) out.boxes.push_back(b);
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

DetectionResult infer(const Detector& model, const Scene& scene) { return infer(model, prepare_scene(model, scene)); }

std::vector<TrainLogEntry> train(Detector& model, std::span<const PreparedScene> scenes, const TrainConfig& cfg,
                                 const StepCallback& on_step) {
  if (scenes.empty()) throw std::invalid_argument("train: no scenes");
  if (cfg.batch == 0) throw ConfigError("train: batch must be >= 1");
  const auto opt = make_optimizer(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(scenes.size());
  std::size_t cursor = order.size();
  std::vector<TrainLogEntry> log;
  log.reserve(cfg.steps);
  std::vector<const PreparedScene*> batch;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    batch.clear();
    while (batch.size() < std::min(cfg.batch, scenes.size())) {
      if (cursor == order.size()) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch.push_back(&scenes[order[cursor++]]);
    }
    const StepResult r = train_step(model, batch, *opt, cfg.grad_clip);
    log.push_back({step, r.loss, opt->lr()});
    if (on_step) on_step(log.back());
  }
  return log;
}

std::vector<double> smooth(std::span<const double> values, std::size_t window) {
  std::vector<double> out(values.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += values[i];
    if (i >= window) acc -= values[i - window];
    out[i] = acc / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

}  // namespace msadet
