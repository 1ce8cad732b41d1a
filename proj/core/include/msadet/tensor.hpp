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

// Dense row-major f64 tensors with tape-based reverse-mode differentiation.
//
// A Tensor is a shared handle: copying a Tensor aliases the same storage.
// Operations record onto the GradGraph that is active on the calling thread
// (see GradGraph::Scope) whenever at least one operand requires a gradient.
// With no active graph, operations are evaluated without recording.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace msadet {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);

namespace detail {
struct TensorImpl;
}

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const noexcept { return impl_ != nullptr; }

  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;
  /// Product of every extent but the last; 1 for rank 0 and 1.
  std::size_t rows() const;
  /// Last extent; 1 for rank 0.
  std::size_t cols() const;

  std::span<double> data();
  std::span<const double> data() const;
  double& operator()(std::size_t r, std::size_t c);
  double operator()(std::size_t r, std::size_t c) const;
  double item() const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool value);

  bool has_grad() const;
  /// Empty span until a backward pass has reached this tensor.
  std::span<const double> grad() const;
  /// Allocates a zero gradient buffer if none exists.
  std::span<double> mutable_grad();
  void zero_grad();

  /// Deep copy of the values, detached from any graph.
  Tensor detach() const;
  bool same_storage(const Tensor& other) const noexcept { return impl_ == other.impl_; }

  const std::shared_ptr<detail::TensorImpl>& impl() const noexcept { return impl_; }
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

enum class OpKind {
  kMatmul,
  kMatmulNT,
  kAdd,
  kSub,
  kMul,
  kScale,
  kRelu,
  kExp,
  kSoftmaxRows,
  kLayerNorm,
  kLinear,
  kConcatChannels,
  kSliceChannels,
  kWeightedGather,
  kMaxPoolGroups,
  kSum,
  kCrossEntropy,
  kL1Loss,
};

std::string_view op_name(OpKind kind);

/// Append-only tape of differentiable operations.
class GradGraph {
 public:
  struct Node {
    OpKind kind;
    std::vector<std::shared_ptr<detail::TensorImpl>> inputs;
    std::shared_ptr<detail::TensorImpl> output;
    std::function<void()> backward;
  };

  /// Makes a graph the recording target of the current thread for its lifetime.
  class Scope {
   public:
    explicit Scope(GradGraph& graph);
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    GradGraph* previous_;
  };

  GradGraph() = default;
  GradGraph(const GradGraph&) = delete;
  GradGraph& operator=(const GradGraph&) = delete;

  static GradGraph* active() noexcept;

  void record(Node node);

  /// Seeds d(loss)/d(loss) = 1 and runs every node once, newest first.
  /// A graph can be differentiated only once.
  void backward(const Tensor& loss);

  std::size_t size() const noexcept { return nodes_.size(); }
  std::span<const Node> nodes() const noexcept { return nodes_; }

 private:
  std::vector<Node> nodes_;
  bool consumed_ = false;
};

/// Suspends recording on the current thread for its lifetime.
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  GradGraph* previous_;
};

/// Tallies floating-point operations by stage label on the current thread.
class OpCounter {
 public:
  class Stage {
   public:
    explicit Stage(std::string name);
    ~Stage();
    Stage(const Stage&) = delete;
    Stage& operator=(const Stage&) = delete;

   private:
    std::string previous_;
  };

  OpCounter();
  ~OpCounter();
  OpCounter(const OpCounter&) = delete;
  OpCounter& operator=(const OpCounter&) = delete;

  static void add(std::uint64_t flops);

  const std::map<std::string, std::uint64_t>& by_stage() const noexcept { return counts_; }
  std::uint64_t total() const;

 private:
  std::map<std::string, std::uint64_t> counts_;
  OpCounter* previous_;
};

// ---- operations -----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
/// a · bᵀ for a [m×k], b [n×k].
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Elementwise product.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double s);
Tensor relu(const Tensor& x);
Tensor exp(const Tensor& x);
/// Row-wise softmax with per-row max subtraction.
Tensor softmax_rows(const Tensor& x);
/// Row-wise standardisation, (x - mean) / sqrt(max(var, variance_floor)).
Tensor layer_norm(const Tensor& x, double variance_floor = 1e-5);
/// x · w + b along the last axis. `b` may be undefined.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);
Tensor concat_channels(const Tensor& a, const Tensor& b);
Tensor concat_channels(std::span<const Tensor> parts);
/// Columns [begin, end) of a matrix.
Tensor slice_channels(const Tensor& x, std::size_t begin, std::size_t end);
/// out[q] = sum_j weights[q*k + j] * x[indices[q*k + j]]. Weights are constants.
Tensor weighted_gather(const Tensor& x, std::span<const std::size_t> indices,
                       std::span<const double> weights, std::size_t k);
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices);
/// Column-wise max over consecutive blocks of `group_size` rows.
Tensor max_pool_groups(const Tensor& x, std::size_t group_size);
Tensor sum(const Tensor& x);
/// Summed negative log-likelihood of `targets` under row-wise softmax(logits).
Tensor cross_entropy(const Tensor& logits, std::span<const std::size_t> targets);
/// Summed absolute difference.
Tensor l1_loss(const Tensor& a, const Tensor& b);

// ---- initialisation & serialisation ---------------------------------------

Tensor randn(Shape shape, std::mt19937_64& rng, double stddev = 1.0, bool requires_grad = false);
Tensor uniform(Shape shape, std::mt19937_64& rng, double lo, double hi,
               bool requires_grad = false);

/// Binary layout: "LODT", u32 version, u32 rank, u64 extents, f64 payload (all LE).
void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in);

}  // namespace msadet
