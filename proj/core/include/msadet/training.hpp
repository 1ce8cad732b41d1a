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
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "msadet/model.hpp"
#include "msadet/types.hpp"

namespace msadet {

enum class OptimizerKind { kMomentumSgd, kAdam };

struct TrainConfig {
  double lr = 1e-3;
  double momentum = 0.9;
  std::size_t steps = 1000;
  std::size_t batch = 1;
  std::uint64_t seed = 0;
  /// Global L2 gradient-norm clip; 0 disables.
  double grad_clip = 0.0;
  OptimizerKind optimizer = OptimizerKind::kMomentumSgd;
};

/// A scene with its coordinate-only geometry precomputed for one model config.
struct PreparedScene {
  std::string id;
  SceneGeometry geometry;
  std::vector<Box3D> boxes;
};

PreparedScene prepare_scene(const Detector& model, const Scene& scene);

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  /// Updates every parameter that has a gradient.
  virtual void step(ParamStore& params) = 0;
  double lr() const noexcept { return lr_; }
  void set_lr(double lr) noexcept { lr_ = lr; }

 protected:
  explicit Optimizer(double lr) : lr_(lr) {}
  double lr_;
};

/// Heavy-ball gradient descent: v <- momentum * v + g; p <- p - lr * v.
class MomentumSgd final : public Optimizer {
 public:
  MomentumSgd(double lr, double momentum) : Optimizer(lr), momentum_(momentum) {}
  void step(ParamStore& params) override;

 private:
  double momentum_;
  std::vector<std::vector<double>> velocity_;
};

/// Adam with bias correction; beta1 is the configured momentum.
class Adam final : public Optimizer {
 public:
  Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8)
      : Optimizer(lr), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}
  void step(ParamStore& params) override;

 private:
  double beta1_, beta2_, epsilon_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

std::unique_ptr<Optimizer> make_optimizer(const TrainConfig& cfg);

struct StepResult {
  double loss = 0.0;  // mean over the batch
  double grad_norm = 0.0;
};

/// One forward/backward/update over `batch`. Per-scene gradients are summed in
/// batch order and averaged. Throws TrainingError on a non-finite loss.
StepResult train_step(Detector& model, std::span<const PreparedScene* const> batch, Optimizer& opt,
                      double grad_clip = 0.0);

/// Forward pass without recording; keeps queries scoring above the model's
/// threshold. No non-maximum suppression.
DetectionResult infer(const Detector& model, const PreparedScene& scene);
DetectionResult infer(const Detector& model, const Scene& scene);

struct TrainLogEntry {
  std::size_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
};

using StepCallback = std::function<void(const TrainLogEntry&)>;

/// Runs cfg.steps steps, drawing batches from a per-epoch shuffle seeded by
/// cfg.seed.
std::vector<TrainLogEntry> train(Detector& model, std::span<const PreparedScene> scenes, const TrainConfig& cfg,
                                 const StepCallback& on_step = {});

/// Moving average with a trailing window (shorter at the start).
std::vector<double> smooth(std::span<const double> values, std::size_t window);

}  // namespace msadet
