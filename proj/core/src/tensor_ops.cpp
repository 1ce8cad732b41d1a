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
#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>

#include "msadet/errors.hpp"
#include "msadet/tensor.hpp"
#include "tensor_impl.hpp"

namespace msadet {
namespace {

using detail::TensorImpl;
using ImplPtr = std::shared_ptr<TensorImpl>;

// c[m×n] += a[m×k] · b[k×n], row-major. Every output accumulates its k
// terms in index order onto its starting value, so results never depend on
// buffer alignment. `c = c + t0 + t1 + t2 + t3` associates left to right, so
// the unrolled loop keeps that order while touching each output row once per
// four terms; the inner loop vectorises across contiguous outputs.
void gemm(const double* __restrict a, const double* __restrict b, double* __restrict c, std::size_t m,
          std::size_t k, std::size_t n) {
  const std::size_t k4 = k - k % 4;
  for (std::size_t i = 0; i < m; ++i) {
    double* __restrict ci = c + i * n;
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k4; p += 4) {
      const double a0 = ai[p], a1 = ai[p + 1], a2 = ai[p + 2], a3 = ai[p + 3];
      const double* __restrict b0 = b + p * n;
      const double* __restrict b1 = b0 + n;
      const double* __restrict b2 = b1 + n;
      const double* __restrict b3 = b2 + n;
      for (std::size_t j = 0; j < n; ++j) ci[j] = ci[j] + a0 * b0[j] + a1 * b1[j] + a2 * b2[j] + a3 * b3[j];
    }
    for (std::size_t p = k4; p < k; ++p) {
      const double av = ai[p];
      const double* __restrict bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

// c[k×n] += a[m×k]ᵀ · b[m×n] without materialising the transpose; each
// output accumulates over the m rows in index order, as gemm would.
void gemm_tn(const double* __restrict a, const double* __restrict b, double* __restrict c, std::size_t m,
             std::size_t k, std::size_t n) {
  const std::size_t m4 = m - m % 4;
  for (std::size_t i = 0; i < m4; i += 4) {
    const double* __restrict b0 = b + i * n;
    const double* __restrict b1 = b0 + n;
    const double* __restrict b2 = b1 + n;
    const double* __restrict b3 = b2 + n;
    for (std::size_t p = 0; p < k; ++p) {
      const double a0 = a[i * k + p], a1 = a[(i + 1) * k + p], a2 = a[(i + 2) * k + p], a3 = a[(i + 3) * k + p];
      double* __restrict cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] = cp[j] + a0 * b0[j] + a1 * b1[j] + a2 * b2[j] + a3 * b3[j];
    }
  }
  for (std::size_t i = m4; i < m; ++i) {
    const double* __restrict bi = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      double* __restrict cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += av * bi[j];
    }
  }
}

std::vector<double> transposed(const std::vector<double>& x, std::size_t rows, std::size_t cols) {
  std::vector<double> t(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) t[c * rows + r] = x[r * cols + c];
  }
  return t;
}

bool wants_grad(std::initializer_list<const Tensor*> inputs) {
  if (GradGraph::active() == nullptr) return false;
  for (const Tensor* t : inputs) {
    if (t->defined() && t->requires_grad()) return true;
  }
  return false;
}

// Marks `out` as differentiable and appends the node to the active graph.
void record(OpKind kind, std::initializer_list<const Tensor*> inputs, Tensor& out,
            std::function<void()> backward) {
  GradGraph::Node node{kind, {}, out.impl(), std::move(backward)};
  for (const Tensor* t : inputs) {
    if (t->defined()) node.inputs.push_back(t->impl());
  }
  out.set_requires_grad(true);
  GradGraph::active()->record(std::move(node));
}

void record_many(OpKind kind, std::span<const Tensor> inputs, Tensor& out,
                 std::function<void()> backward) {
  GradGraph::Node node{kind, {}, out.impl(), std::move(backward)};
  for (const Tensor& t : inputs) node.inputs.push_back(t.impl());
  out.set_requires_grad(true);
  GradGraph::active()->record(std::move(node));
}

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw DimensionError(std::string(op) + ": undefined operand");
}

void require_matrix(const Tensor& t, const char* op) {
  require_defined(t, op);
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_to_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require_defined(a, op);
  require_defined(b, op);
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) +
                         " vs " + shape_to_string(b.shape()));
  }
}

Tensor output_like(Shape shape) { return Tensor::zeros(std::move(shape)); }

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw DimensionError("matmul: inner extents differ, " + shape_to_string(a.shape()) + " x " +
                         shape_to_string(b.shape()));
  }
  Tensor out = output_like({m, n});
  gemm(a.impl()->data.data(), b.impl()->data.data(), out.impl()->data.data(), m, k, n);
  OpCounter::add(2ull * m * k * n);
  if (wants_grad({&a, &b})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* bi = b.impl().get();
    TensorImpl* oi = out.impl().get();
    record(OpKind::kMatmul, {&a, &b}, out, [=] {
      if (ai->requires_grad) {
        gemm(oi->grad.data(), transposed(bi->data, k, n).data(), ai->ensure_grad().data(), m, n, k);
      }
      if (bi->requires_grad) {
        gemm_tn(ai->data.data(), oi->grad.data(), bi->ensure_grad().data(), m, k, n);
      }
    });
  }
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_nt");
  require_matrix(b, "matmul_nt");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[0];
  if (b.shape()[1] != k) {
    throw DimensionError("matmul_nt: inner extents differ, " + shape_to_string(a.shape()) +
                         " x " + shape_to_string(b.shape()) + "^T");
  }
  Tensor out = output_like({m, n});
  gemm(a.impl()->data.data(), transposed(b.impl()->data, n, k).data(), out.impl()->data.data(), m, k, n);
  OpCounter::add(2ull * m * k * n);
  if (wants_grad({&a, &b})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* bi = b.impl().get();
    TensorImpl* oi = out.impl().get();
    record(OpKind::kMatmulNT, {&a, &b}, out, [=] {
      if (ai->requires_grad) gemm(oi->grad.data(), bi->data.data(), ai->ensure_grad().data(), m, n, k);
      if (bi->requires_grad) {
        gemm_tn(oi->grad.data(), ai->data.data(), bi->ensure_grad().data(), m, n, k);
      }
    });
  }
  return out;
}

namespace {

template <typename Fwd, typename GradA, typename GradB>
Tensor binary_elementwise(OpKind kind, const char* name, const Tensor& a, const Tensor& b, Fwd fwd,
                          GradA grad_a, GradB grad_b) {
  require_same_shape(a, b, name);
  Tensor out = output_like(a.shape());
  const auto& ad = a.impl()->data;
  const auto& bd = b.impl()->data;
  auto& od = out.impl()->data;
  for (std::size_t i = 0; i < od.size(); ++i) od[i] = fwd(ad[i], bd[i]);
  OpCounter::add(od.size());
  if (wants_grad({&a, &b})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* bi = b.impl().get();
    TensorImpl* oi = out.impl().get();
    record(kind, {&a, &b}, out, [=] {
      const auto& g = oi->grad;
      if (ai->requires_grad) {
        auto& ga = ai->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += grad_a(g[i], ai->data[i], bi->data[i]);
      }
      if (bi->requires_grad) {
        auto& gb = bi->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += grad_b(g[i], ai->data[i], bi->data[i]);
      }
    });
  }
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      OpKind::kAdd, "add", a, b, [](double x, double y) { return x + y; },
      [](double g, double, double) { return g; }, [](double g, double, double) { return g; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      OpKind::kSub, "sub", a, b, [](double x, double y) { return x - y; },
      [](double g, double, double) { return g; }, [](double g, double, double) { return -g; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_elementwise(
      OpKind::kMul, "mul", a, b, [](double x, double y) { return x * y; },
      [](double g, double, double y) { return g * y; }, [](double g, double x, double) { return g * x; });
}

Tensor scale(const Tensor& x, double s) {
  require_defined(x, "scale");
  Tensor out = output_like(x.shape());
  const auto& xd = x.impl()->data;
  auto& od = out.impl()->data;
  for (std::size_t i = 0; i < od.size(); ++i) od[i] = s * xd[i];
  OpCounter::add(od.size());
  if (wants_grad({&x})) {
    TensorImpl* xi = x.impl().get();
    TensorImpl* oi = out.impl().get();
    record(OpKind::kScale, {&x}, out, [=] {
      auto& gx = xi->ensure_grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += s * oi->grad[i];
    });
  }
  return out;
}

Tensor relu(const Tensor& x) {
  require_defined(x, "relu");
  Tensor out = output_like(x.shape());
  const auto& xd = x.impl()->data;
  auto& od = out.impl()->data;
  for (std::size_t i = 0; i < od.size(); ++i) od[i] = xd[i] > 0.0 ? xd[i] : 0.0;
  OpCounter::add(od.size());
  if (wants_grad({&x})) {
    TensorImpl* xi = x.impl().get();
    TensorImpl* oi = out.impl().get();
    record(OpKind::kRelu, {&x}, out, [=] {
      auto& gx = xi->ensure_grad();
      for (std::size_t i = 0; i < gx.size(); ++i) {
        if (xi->data[i] > 0.0) gx[i] += oi->grad[i];
      }
    });
  }
  return out;
}

Tensor exp(const Tensor& x) {
  require_defined(x, "exp");
  Tensor out = output_like(x.shape());
  const auto& xd = x.impl()->data;
  auto& od = out.impl()->data;
  for (std::size_t i = 0; i < od.size(); ++i) od[i] = std::exp(xd[i]);
  OpCounter::add(od.size());
  if (wants_grad({&x})) {
    TensorImpl* xi = x.impl().get();
    TensorImpl* oi = out.impl().get();
    record(OpKind::kExp, {&x}, out, [=] {
      auto& gx = xi->ensure_grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += oi->grad[i] * oi->data[i];
    });
  }
  return out;
}

Tensor softmax_rows(const Tensor& x) {
  require_defined(x, "softmax_rows");
  const std::size_t m = x.rows(), n = x.cols();
  Tensor out = output_like(x.shape());
  const auto& xd = x.impl()->data;
  auto& od = out.impl()->data;
  for (std::size_t r = 0; r < m; ++r) {
    const double* row = xd.data() + r * n;
    double* o = od.data() + r * n;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n; ++c) mx = std::max(mx, row[c]);
    double z = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      o[c] = std::exp(row[c] - mx);
      z += o[c];
    }
    for (std::size_t c = 0; c < n; ++c) o[c] /= z;
  }
  OpCounter::add(4ull * m * n);
  if (wants_grad({&x})) {
    TensorImpl* xi = x.impl().get();
    TensorImpl* oi = out.impl().get();
    record(OpKind::kSoftmaxRows, {&x}, out, [=] {
      auto& gx = xi->ensure_grad();
      for (std::size_t r = 0; r < m; ++r) {
        const double* y = oi->data.data() + r * n;
        const double* gy = oi->grad.data() + r * n;
        double dot = 0.0;
        for (std::size_t c = 0; c < n; ++c) dot += gy[c] * y[c];
        double* g = gx.data() + r * n;
        for (std::size_t c = 0; c < n; ++c) g[c] += y[c] * (gy[c] - dot);
      }
    });
  }
  return out;
}

Tensor layer_norm(const Tensor& x, double variance_floor) {
  require_defined(x, "layer_norm");
  const std::size_t m = x.rows(), n = x.cols();
  Tensor out = output_like(x.shape());
  std::vector<double> inv_sigma(m);
  std::vector<char> floored(m);
  const auto& xd = x.impl()->data;
  auto& od = out.impl()->data;
  for (std::size_t r = 0; r < m; ++r) {
    const double* row = xd.data() + r * n;
    double mean = 0.0;
    for (std::size_t c = 0; c < n; ++c) mean += row[c];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t c = 0; c < n; ++c) var += (row[c] - mean) * (row[c] - mean);
    var /= static_cast<double>(n);
    floored[r] = var < variance_floor;
    inv_sigma[r] = 1.0 / std::sqrt(std::max(var, variance_floor));
    for (std::size_t c = 0; c < n; ++c) od[r * n + c] = (row[c] - mean) * inv_sigma[r];
  }
  OpCounter::add(5ull * m * n);
  if (wants_grad({&x})) {
    TensorImpl* xi = x.impl().get();
    TensorImpl* oi = out.impl().get();
    record(OpKind::kLayerNorm, {&x}, out, [=, inv_sigma = std::move(inv_sigma), floored = std::move(floored)] {
      auto& gx = xi->ensure_grad();
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t r = 0; r < m; ++r) {
        const double* y = oi->data.data() + r * n;
        const double* gy = oi->grad.data() + r * n;
        double mean_g = 0.0, mean_gy = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
          mean_g += gy[c];
          mean_gy += gy[c] * y[c];
        }
        mean_g *= inv_n;
        mean_gy *= inv_n;
        if (floored[r]) mean_gy = 0.0;  // sigma is a constant below the floor
        double* g = gx.data() + r * n;
        for (std::size_t c = 0; c < n; ++c) g[c] += inv_sigma[r] * (gy[c] - mean_g - y[c] * mean_gy);
      }
    });
  }
  return out;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  require_defined(x, "linear");
  require_matrix(w, "linear");
  const std::size_t in = w.shape()[0], outw = w.shape()[1];
  if (x.rank() == 0 || x.cols() != in) {
    throw DimensionError("linear: input " + shape_to_string(x.shape()) + " does not match weight " +
                         shape_to_string(w.shape()));
  }
  if (b.defined() && (b.rank() != 1 || b.shape()[0] != outw)) {
    throw DimensionError("linear: bias " + shape_to_string(b.shape()) + " does not match weight " +
                         shape_to_string(w.shape()));
  }
  const std::size_t m = x.rows();
  Shape shape = x.shape();
  shape.back() = outw;
  Tensor out = output_like(std::move(shape));
  auto& od = out.impl()->data;
  gemm(x.impl()->data.data(), w.impl()->data.data(), od.data(), m, in, outw);
  if (b.defined()) {
    const auto& bd = b.impl()->data;
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < outw; ++c) od[r * outw + c] += bd[c];
    }
  }
  OpCounter::add(2ull * m * in * outw + (b.defined() ? m * outw : 0));
  if (wants_grad({&x, &w, &b})) {
    TensorImpl* xi = x.impl().get();
    TensorImpl* wi = w.impl().get();
    TensorImpl* bi = b.defined() ? b.impl().get() : nullptr;
    TensorImpl* oi = out.impl().get();
    record(OpKind::kLinear, {&x, &w, &b}, out, [=] {
      const auto& g = oi->grad;
      if (xi->requires_grad) {
        gemm(g.data(), transposed(wi->data, in, outw).data(), xi->ensure_grad().data(), m, outw, in);
      }
      if (wi->requires_grad) {
        gemm_tn(xi->data.data(), g.data(), wi->ensure_grad().data(), m, in, outw);
      }
      if (bi && bi->requires_grad) {
        auto& gb = bi->ensure_grad();
        for (std::size_t r = 0; r < m; ++r) {
          for (std::size_t c = 0; c < outw; ++c) gb[c] += g[r * outw + c];
        }
      }
    });
  }
  return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  const Tensor parts[] = {a, b};
  return concat_channels(parts);
}

Tensor concat_channels(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_channels: no operands");
  for (const auto& p : parts) require_matrix(p, "concat_channels");
  const std::size_t m = parts[0].shape()[0];
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.shape()[0] != m) {
      throw DimensionError("concat_channels: leading extents differ, " + shape_to_string(parts[0].shape()) +
                           " vs " + shape_to_string(p.shape()));
    }
    total += p.shape()[1];
  }
  Tensor out = output_like({m, total});
  auto& od = out.impl()->data;
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    const std::size_t c = p.shape()[1];
    const auto& pd = p.impl()->data;
    for (std::size_t r = 0; r < m; ++r) std::copy_n(pd.data() + r * c, c, od.data() + r * total + off);
    offsets.push_back(off);
    off += c;
  }
  bool any = false;
  if (GradGraph::active()) {
    for (const auto& p : parts) any = any || p.requires_grad();
  }
  if (any) {
    std::vector<TensorImpl*> ins;
    for (const auto& p : parts) ins.push_back(p.impl().get());
    TensorImpl* oi = out.impl().get();
    record_many(OpKind::kConcatChannels, parts, out, [=] {
      for (std::size_t i = 0; i < ins.size(); ++i) {
        if (!ins[i]->requires_grad) continue;
        const std::size_t c = ins[i]->shape[1];
        auto& g = ins[i]->ensure_grad();
        for (std::size_t r = 0; r < m; ++r) {
          const double* src = oi->grad.data() + r * total + offsets[i];
          for (std::size_t j = 0; j < c; ++j) g[r * c + j] += src[j];
        }
      }
    });
  }
  return out;
}

Tensor slice_channels(const Tensor& x, std::size_t begin, std::size_t end) {
  require_matrix(x, "slice_channels");
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  if (begin > end || end > n) {
    throw DimensionError("slice_channels: range [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") outside " + shape_to_string(x.shape()));
  }
  const std::size_t w = end - begin;
  Tensor out = output_like({m, w});
  const auto& xd = x.impl()->data;
  auto& od = out.impl()->data;
  for (std::size_t r = 0; r < m; ++r) std::copy_n(xd.data() + r * n + begin, w, od.data() + r * w);
  if (wants_grad({&x})) {
    TensorImpl* xi = x.impl().get();
    TensorImpl* oi = out.impl().get();
    record(OpKind::kSliceChannels, {&x}, out, [=] {
      auto& g = xi->ensure_grad();
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t j = 0; j < w; ++j) g[r * n + begin + j] += oi->grad[r * w + j];
      }
    });
  }
  return out;
}

Tensor weighted_gather(const Tensor& x, std::span<const std::size_t> indices,
                       std::span<const double> weights, std::size_t k) {
  require_matrix(x, "weighted_gather");
  if (k == 0 || indices.size() % k != 0 || weights.size() != indices.size()) {
    throw DimensionError("weighted_gather: " + std::to_string(indices.size()) + " indices and " +
                         std::to_string(weights.size()) + " weights are not a whole number of rows of " +
                         std::to_string(k));
  }
  const std::size_t m = x.shape()[0], c = x.shape()[1], q = indices.size() / k;
  for (auto i : indices) {
    if (i >= m) throw std::out_of_range("weighted_gather: row index " + std::to_string(i) + " >= " + std::to_string(m));
  }
  Tensor out = output_like({q, c});
  const auto& xd = x.impl()->data;
  auto& od = out.impl()->data;
  for (std::size_t r = 0; r < q; ++r) {
    double* o = od.data() + r * c;
    for (std::size_t j = 0; j < k; ++j) {
      const double w = weights[r * k + j];
      const double* src = xd.data() + indices[r * k + j] * c;
      for (std::size_t col = 0; col < c; ++col) o[col] += w * src[col];
    }
  }
  OpCounter::add(2ull * q * k * c);
  if (wants_grad({&x})) {
    TensorImpl* xi = x.impl().get();
    TensorImpl* oi = out.impl().get();
    std::vector<std::size_t> idx(indices.begin(), indices.end());
    std::vector<double> wts(weights.begin(), weights.end());
    record(OpKind::kWeightedGather, {&x}, out, [=, idx = std::move(idx), wts = std::move(wts)] {
      auto& g = xi->ensure_grad();
      for (std::size_t r = 0; r < q; ++r) {
        const double* go = oi->grad.data() + r * c;
        for (std::size_t j = 0; j < k; ++j) {
          const double w = wts[r * k + j];
          double* dst = g.data() + idx[r * k + j] * c;
          for (std::size_t col = 0; col < c; ++col) dst[col] += w * go[col];
        }
      }
    });
  }
  return out;
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices) {
  std::vector<double> ones(indices.size(), 1.0);
  return weighted_gather(x, indices, ones, 1);
}

Tensor max_pool_groups(const Tensor& x, std::size_t group_size) {
  require_matrix(x, "max_pool_groups");
  const std::size_t m = x.shape()[0], c = x.shape()[1];
  if (group_size == 0 || m % group_size != 0) {
    throw DimensionError("max_pool_groups: " + std::to_string(m) + " rows are not a multiple of group size " +
                         std::to_string(group_size));
  }
  const std::size_t groups = m / group_size;
  Tensor out = output_like({groups, c});
  std::vector<std::size_t> argmax(groups * c);
  const auto& xd = x.impl()->data;
  auto& od = out.impl()->data;
  for (std::size_t gi = 0; gi < groups; ++gi) {
    for (std::size_t col = 0; col < c; ++col) {
      std::size_t best = gi * group_size;
      for (std::size_t r = best + 1; r < (gi + 1) * group_size; ++r) {
        if (xd[r * c + col] > xd[best * c + col]) best = r;
      }
      argmax[gi * c + col] = best;
      od[gi * c + col] = xd[best * c + col];
    }
  }
  OpCounter::add(m * c);
  if (wants_grad({&x})) {
    TensorImpl* xi = x.impl().get();
    TensorImpl* oi = out.impl().get();
    record(OpKind::kMaxPoolGroups, {&x}, out, [=, argmax = std::move(argmax)] {
      auto& g = xi->ensure_grad();
      for (std::size_t i = 0; i < argmax.size(); ++i) g[argmax[i] * c + i % c] += oi->grad[i];
    });
  }
  return out;
}

Tensor sum(const Tensor& x) {
  require_defined(x, "sum");
  double s = 0.0;
  for (double v : x.data()) s += v;
  Tensor out = Tensor::scalar(s);
  OpCounter::add(x.numel());
  if (wants_grad({&x})) {
    TensorImpl* xi = x.impl().get();
    TensorImpl* oi = out.impl().get();
    record(OpKind::kSum, {&x}, out, [=] {
      auto& g = xi->ensure_grad();
      for (auto& v : g) v += oi->grad[0];
    });
  }
  return out;
}

Tensor cross_entropy(const Tensor& logits, std::span<const std::size_t> targets) {
  require_matrix(logits, "cross_entropy");
  const std::size_t m = logits.shape()[0], n = logits.shape()[1];
  if (targets.size() != m) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for logits " +
                         shape_to_string(logits.shape()));
  }
  for (auto t : targets) {
    if (t >= n) {
      throw std::out_of_range("cross_entropy: target " + std::to_string(t) + " outside " +
                              std::to_string(n) + " classes");
    }
  }
  std::vector<double> probs(m * n);
  const auto& ld = logits.impl()->data;
  double loss = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    const double* row = ld.data() + r * n;
    const double mx = *std::max_element(row, row + n);
    double z = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      probs[r * n + c] = std::exp(row[c] - mx);
      z += probs[r * n + c];
    }
    for (std::size_t c = 0; c < n; ++c) probs[r * n + c] /= z;
    loss += mx + std::log(z) - row[targets[r]];
  }
  Tensor out = Tensor::scalar(loss);
  OpCounter::add(5ull * m * n);
  if (wants_grad({&logits})) {
    TensorImpl* li = logits.impl().get();
    TensorImpl* oi = out.impl().get();
    std::vector<std::size_t> tgt(targets.begin(), targets.end());
    record(OpKind::kCrossEntropy, {&logits}, out, [=, probs = std::move(probs), tgt = std::move(tgt)] {
      auto& g = li->ensure_grad();
      const double go = oi->grad[0];
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
          g[r * n + c] += go * (probs[r * n + c] - (c == tgt[r] ? 1.0 : 0.0));
        }
      }
    });
  }
  return out;
}

Tensor l1_loss(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "l1_loss");
  const auto& ad = a.impl()->data;
  const auto& bd = b.impl()->data;
  double s = 0.0;
  for (std::size_t i = 0; i < ad.size(); ++i) s += std::abs(ad[i] - bd[i]);
  Tensor out = Tensor::scalar(s);
  OpCounter::add(2ull * ad.size());
  if (wants_grad({&a, &b})) {
    TensorImpl* ai = a.impl().get();
    TensorImpl* bi = b.impl().get();
    TensorImpl* oi = out.impl().get();
    record(OpKind::kL1Loss, {&a, &b}, out, [=] {
      const double go = oi->grad[0];
      for (std::size_t i = 0; i < ai->data.size(); ++i) {
        const double d = ai->data[i] - bi->data[i];
        const double sgn = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        if (ai->requires_grad) ai->ensure_grad()[i] += go * sgn;
        if (bi->requires_grad) bi->ensure_grad()[i] -= go * sgn;
      }
    });
  }
  return out;
}

Tensor randn(Shape shape, std::mt19937_64& rng, double stddev, bool requires_grad) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> v(detail::numel_of(shape));
  for (auto& x : v) x = dist(rng);
  return Tensor::from_data(std::move(shape), std::move(v), requires_grad);
}

Tensor uniform(Shape shape, std::mt19937_64& rng, double lo, double hi, bool requires_grad) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(detail::numel_of(shape));
  for (auto& x : v) x = dist(rng);
  return Tensor::from_data(std::move(shape), std::move(v), requires_grad);
}

}  // namespace msadet
