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

#include "msadet/tensor.hpp"

#include <sstream>
#include <stdexcept>

#include "msadet/errors.hpp"
#include "tensor_impl.hpp"

namespace msadet {

using detail::TensorImpl;

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  auto impl = std::make_shared<TensorImpl>();
  impl->data.assign(detail::numel_of(shape), value);
  impl->shape = std::move(shape);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
  if (detail::numel_of(shape) != data.size()) {
    throw DimensionError("shape " + shape_to_string(shape) + " does not hold " +
                         std::to_string(data.size()) + " values");
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value) { return from_data({}, {value}); }

const Shape& Tensor::shape() const { return impl_->shape; }
std::size_t Tensor::numel() const { return impl_->data.size(); }

std::size_t Tensor::rows() const {
  const auto& s = impl_->shape;
  if (s.size() < 2) return 1;
  std::size_t n = 1;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) n *= s[i];
  return n;
}

std::size_t Tensor::cols() const {
  const auto& s = impl_->shape;
  return s.empty() ? 1 : s.back();
}

std::span<double> Tensor::data() { return impl_->data; }
std::span<const double> Tensor::data() const { return impl_->data; }

double& Tensor::operator()(std::size_t r, std::size_t c) { return impl_->data[r * cols() + c]; }
double Tensor::operator()(std::size_t r, std::size_t c) const { return impl_->data[r * cols() + c]; }

double Tensor::item() const {
  if (numel() != 1) throw DimensionError("item() on tensor of shape " + shape_to_string(shape()));
  return impl_->data[0];
}

bool Tensor::requires_grad() const { return impl_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool value) {
  impl_->requires_grad = value;
  return *this;
}

bool Tensor::has_grad() const { return !impl_->grad.empty(); }
std::span<const double> Tensor::grad() const { return impl_->grad; }
std::span<double> Tensor::mutable_grad() { return impl_->ensure_grad(); }
void Tensor::zero_grad() { impl_->grad.clear(); }

Tensor Tensor::detach() const { return from_data(impl_->shape, impl_->data); }

// ---- GradGraph -------------------------------------------------------------

namespace {
thread_local GradGraph* g_active_graph = nullptr;
thread_local OpCounter* g_active_counter = nullptr;
thread_local std::string g_stage;
}  // namespace

GradGraph::Scope::Scope(GradGraph& graph) : previous_(g_active_graph) { g_active_graph = &graph; }
GradGraph::Scope::~Scope() { g_active_graph = previous_; }

NoGradScope::NoGradScope() : previous_(g_active_graph) { g_active_graph = nullptr; }
NoGradScope::~NoGradScope() { g_active_graph = previous_; }

GradGraph* GradGraph::active() noexcept { return g_active_graph; }

void GradGraph::record(Node node) {
  if (consumed_) throw std::logic_error("recording onto a graph that was already differentiated");
  nodes_.push_back(std::move(node));
}

void GradGraph::backward(const Tensor& loss) {
  if (consumed_) throw std::logic_error("backward called twice on the same graph");
  if (!loss.defined() || loss.numel() != 1) {
    throw DimensionError("backward expects a scalar loss");
  }
  consumed_ = true;
  auto& seed = loss.impl()->ensure_grad();
  seed[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->output->grad.empty()) continue;
    it->backward();
  }
}

// ---- OpCounter -------------------------------------------------------------

OpCounter::Stage::Stage(std::string name) : previous_(std::move(g_stage)) { g_stage = std::move(name); }
OpCounter::Stage::~Stage() { g_stage = std::move(previous_); }

OpCounter::OpCounter() : previous_(g_active_counter) { g_active_counter = this; }
OpCounter::~OpCounter() { g_active_counter = previous_; }

void OpCounter::add(std::uint64_t flops) {
  if (g_active_counter) g_active_counter->counts_[g_stage] += flops;
}

std::uint64_t OpCounter::total() const {
  std::uint64_t t = 0;
  for (const auto& [_, n] : counts_) t += n;
  return t;
}

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kMatmul: return "matmul";
    case OpKind::kMatmulNT: return "matmul_nt";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kRelu: return "relu";
    case OpKind::kExp: return "exp";
    case OpKind::kSoftmaxRows: return "softmax_rows";
    case OpKind::kLayerNorm: return "layer_norm";
    case OpKind::kLinear: return "linear";
    case OpKind::kConcatChannels: return "concat_channels";
    case OpKind::kSliceChannels: return "slice_channels";
    case OpKind::kWeightedGather: return "weighted_gather";
    case OpKind::kMaxPoolGroups: return "max_pool_groups";
    case OpKind::kSum: return "sum";
    case OpKind::kCrossEntropy: return "cross_entropy";
    case OpKind::kL1Loss: return "l1_loss";
  }
  return "unknown";
}

}  // namespace msadet
