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
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "msadet/tensor.hpp"

namespace msadet {

struct LinearParams {
  Tensor weight;  // in x out
  Tensor bias;    // out, may be undefined
};

/// linear -> relu -> linear
struct MlpParams {
  LinearParams first;
  LinearParams second;
};

Tensor apply(const LinearParams& p, const Tensor& x);
Tensor apply(const MlpParams& p, const Tensor& x);

/// Ordered, named collection of trainable tensors. Order is registration
/// order and defines checkpoint layout.
///
/// Each initialised tensor draws from its own generator seeded by (seed, name),
/// so a tensor's initial value does not depend on what else was registered.
class ParamStore {
 public:
  using Entry = std::pair<std::string, Tensor>;

  explicit ParamStore(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::mt19937_64 rng_for(std::string_view name) const;

  Tensor add(std::string name, Tensor value);
  /// U(-bound, bound) initialised tensor.
  Tensor add_uniform(std::string name, Shape shape, double bound);
  /// Weights ~ U(-1/sqrt(in), 1/sqrt(in)), zero bias.
  LinearParams add_linear(const std::string& prefix, std::size_t in, std::size_t out, bool bias = true);
  MlpParams add_mlp(const std::string& prefix, std::size_t in, std::size_t hidden, std::size_t out);

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  /// Total number of scalars.
  std::size_t parameter_count() const;
  /// Scalars under names that start with `prefix`.
  std::size_t parameter_count(std::string_view prefix) const;
  Tensor find(std::string_view name) const;
  void zero_grad();

 private:
  std::uint64_t seed_;
  std::vector<Entry> entries_;
};

}  // namespace msadet
