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
#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <sstream>

#include "msadet/errors.hpp"
#include "msadet/tensor.hpp"
#include "oracles.hpp"

namespace msadet {
namespace {

TEST(Tensor, MatmulMatchesTripleLoop) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<std::size_t> dim(1, 9);
    const std::size_t m = dim(rng), k = dim(rng), n = dim(rng);
    const Tensor a = uniform({m, k}, rng, -2.0, 2.0);
    const Tensor b = uniform({k, n}, rng, -2.0, 2.0);
    const Tensor c = matmul(a, b);
    const auto want = testing::naive_matmul(a, b);
    ASSERT_EQ(c.shape(), (Shape{m, n}));
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(c.data()[i], want[i], 1e-12);
  }
}

// Copies into a fresh buffer after a differently sized allocation, so the
// copy usually lands at another alignment.
Tensor relocated(const Tensor& t, std::size_t pad, std::vector<std::vector<double>>& keep) {
  keep.emplace_back(pad, 0.0);
  return Tensor::from_data(t.shape(), std::vector<double>(t.data().begin(), t.data().end()));
}

TEST(Tensor, ProductsSumInIndexOrderWhateverTheAlignment) {
  std::mt19937_64 rng(3);
  std::vector<std::vector<double>> keep;
  for (int trial = 0; trial < 40; ++trial) {
    std::uniform_int_distribution<std::size_t> dim(1, 40);
    const std::size_t m = dim(rng), k = dim(rng), n = dim(rng);
    const Tensor a = uniform({m, k}, rng, -1.0, 1.0);
    const Tensor b = uniform({k, n}, rng, -1.0, 1.0);
    const Tensor bias = uniform({n}, rng, -1.0, 1.0);
    const auto want = testing::naive_matmul(a, b);
    Tensor bt = Tensor::zeros({n, k});
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < n; ++j) bt(j, i) = b(i, j);
    for (std::size_t pad = 1; pad <= 8; ++pad) {
      const Tensor ar = relocated(a, pad, keep);
      const Tensor c = matmul(ar, relocated(b, pad + 3, keep));
      const Tensor nt = matmul_nt(ar, relocated(bt, pad + 5, keep));
      const Tensor lin = linear(ar, relocated(b, pad + 1, keep), bias);
      for (std::size_t i = 0; i < want.size(); ++i) {
        ASSERT_EQ(c.data()[i], want[i]);
        ASSERT_EQ(nt.data()[i], want[i]);
        ASSERT_EQ(lin.data()[i], want[i] + bias.data()[i % n]);
      }
    }
  }
}

TEST(Tensor, MatmulNtEqualsExplicitTranspose) {
  std::mt19937_64 rng(2);
  const Tensor a = uniform({4, 3}, rng, -1.0, 1.0);
  const Tensor b = uniform({5, 3}, rng, -1.0, 1.0);
  Tensor bt = Tensor::zeros({3, 5});
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) bt(j, i) = b(i, j);
  const Tensor x = matmul_nt(a, b), y = matmul(a, bt);
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_NEAR(x.data()[i], y.data()[i], 1e-14);
}

TEST(Tensor, ShapeErrorsNameBothShapes) {
  const Tensor a = Tensor::zeros({2, 3});
  const Tensor b = Tensor::zeros({4, 5});
  try {
    matmul(a, b);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[4x5]"), std::string::npos) << msg;
  }
  EXPECT_THROW(add(a, b), DimensionError);
  EXPECT_THROW(slice_channels(a, 2, 4), DimensionError);
}

TEST(Tensor, SoftmaxRowsAreDistributionsEvenForHugeLogits) {
  const Tensor x = Tensor::from_data({2, 3}, {1000.0, 1001.0, 999.0, -5.0, 0.0, 5.0});
  const Tensor y = softmax_rows(x);
  for (std::size_t r = 0; r < 2; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_TRUE(std::isfinite(y(r, c)));
      s += y(r, c);
    }
    EXPECT_NEAR(s, 1.0, 1e-15);
  }
  EXPECT_NEAR(y(0, 1) / y(0, 0), std::exp(1.0), 1e-12);
}

TEST(Tensor, LayerNormStandardisesRowsAndFloorsVariance) {
  const Tensor x = Tensor::from_data({2, 4}, {1.0, 2.0, 3.0, 4.0, 7.0, 7.0, 7.0, 7.0});
  const Tensor y = layer_norm(x);
  double mean = 0.0, var = 0.0;
  for (std::size_t c = 0; c < 4; ++c) mean += y(0, c) / 4.0;
  for (std::size_t c = 0; c < 4; ++c) var += (y(0, c) - mean) * (y(0, c) - mean) / 4.0;
  EXPECT_NEAR(mean, 0.0, 1e-12);
  EXPECT_NEAR(var, 1.0, 1e-12);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(y(1, c), 0.0);  // constant row stays finite
}

TEST(Tensor, CrossEntropyOfUniformLogitsIsLogClasses) {
  const Tensor logits = Tensor::zeros({3, 4});
  const std::vector<std::size_t> t{0, 1, 3};
  EXPECT_NEAR(cross_entropy(logits, t).item(), 3.0 * std::log(4.0), 1e-12);
  const std::vector<std::size_t> bad{0, 4, 1};
  EXPECT_THROW(cross_entropy(logits, bad), std::out_of_range);
}

TEST(Tensor, MaxPoolTakesColumnwiseGroupMaximum) {
  const Tensor x = Tensor::from_data({4, 2}, {1, 8, 5, 2, -1, -3, -2, -4});
  const Tensor y = max_pool_groups(x, 2);
  EXPECT_EQ(std::vector<double>(y.data().begin(), y.data().end()), (std::vector<double>{5, 8, -1, -3}));
}

TEST(Tensor, BackwardAccumulatesThroughSharedInputs) {
  Tensor x = Tensor::from_data({1, 2}, {3.0, -2.0}, true);
  GradGraph g;
  {
    GradGraph::Scope scope(g);
    const Tensor y = sum(add(mul(x, x), x));  // d/dx = 2x + 1
    g.backward(y);
  }
  EXPECT_DOUBLE_EQ(x.grad()[0], 7.0);
  EXPECT_DOUBLE_EQ(x.grad()[1], -3.0);
  EXPECT_THROW(g.backward(Tensor::scalar(0.0)), std::logic_error);
}

TEST(Tensor, NoGradScopeSuspendsRecording) {
  Tensor x = Tensor::from_data({1, 2}, {1.0, 2.0}, true);
  GradGraph g;
  GradGraph::Scope scope(g);
  {
    NoGradScope off;
    (void)relu(x);
  }
  EXPECT_EQ(g.size(), 0u);
  (void)relu(x);
  EXPECT_EQ(g.size(), 1u);
}

TEST(Tensor, OpCounterAttributesFlopsToStages) {
  OpCounter counter;
  const Tensor a = Tensor::zeros({4, 3}), b = Tensor::zeros({3, 5});
  {
    OpCounter::Stage s("first");
    (void)matmul(a, b);
  }
  {
    OpCounter::Stage s("second");
    (void)add(a, a);
  }
  EXPECT_EQ(counter.by_stage().at("first"), 2u * 4 * 3 * 5);
  EXPECT_EQ(counter.by_stage().at("second"), 12u);
  EXPECT_EQ(counter.total(), 2u * 4 * 3 * 5 + 12u);
}

TEST(Tensor, SerialisationRoundTripsBitExactly) {
  std::mt19937_64 rng(3);
  Tensor t = randn({3, 2, 5}, rng);
  t.data()[0] = -0.0;
  t.data()[1] = 1e-310;
  std::stringstream ss;
  write_tensor(ss, t);
  const Tensor u = read_tensor(ss);
  ASSERT_EQ(u.shape(), t.shape());
  for (std::size_t i = 0; i < t.numel(); ++i) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(u.data()[i]), std::bit_cast<std::uint64_t>(t.data()[i]));
  }
}

TEST(Tensor, ReadRejectsBadMagicAndTruncation) {
  std::stringstream bad("XXXX");
  EXPECT_THROW(read_tensor(bad), ParseError);
  std::stringstream ss;
  write_tensor(ss, Tensor::zeros({4}));
  std::string bytes = ss.str();
  bytes.resize(bytes.size() - 3);
  std::stringstream cut(bytes);
  EXPECT_THROW(read_tensor(cut), ParseError);
}

}  // namespace
}  // namespace msadet
