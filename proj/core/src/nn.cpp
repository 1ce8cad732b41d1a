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
#include "msadet/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace msadet {

Tensor apply(const LinearParams& p, const Tensor& x) { return linear(x, p.weight, p.bias); }

Tensor apply(const MlpParams& p, const Tensor& x) { return apply(p.second, relu(apply(p.first, x))); }

Tensor ParamStore::add(std::string name, Tensor value) {
  if (find(name).defined()) throw std::invalid_argument("duplicate parameter name " + name);
  value.set_requires_grad(true);
  entries_.emplace_back(std::move(name), value);
  return value;
}

std::mt19937_64 ParamStore::rng_for(std::string_view name) const {
  // FNV-1a; stable across platforms, unlike std::hash.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return std::mt19937_64(seq);
}

Tensor ParamStore::add_uniform(std::string name, Shape shape, double bound) {
  auto rng = rng_for(name);
  return add(std::move(name), uniform(std::move(shape), rng, -bound, bound));
}

LinearParams ParamStore::add_linear(const std::string& prefix, std::size_t in, std::size_t out, bool bias) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  LinearParams p;
  p.weight = add_uniform(prefix + ".weight", {in, out}, bound);
  if (bias) p.bias = add(prefix + ".bias", Tensor::zeros({out}));
  return p;
}

MlpParams ParamStore::add_mlp(const std::string& prefix, std::size_t in, std::size_t hidden,
                              std::size_t out) {
  MlpParams p;
  p.first = add_linear(prefix + ".0", in, hidden);
  p.second = add_linear(prefix + ".1", hidden, out);
  return p;
}

std::size_t ParamStore::parameter_count() const { return parameter_count(""); }

std::size_t ParamStore::parameter_count(std::string_view prefix) const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries_) {
    if (name.starts_with(prefix)) n += t.numel();
  }
  return n;
}

Tensor ParamStore::find(std::string_view name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  return {};
}

void ParamStore::zero_grad() {
  for (auto& [_, t] : entries_) t.zero_grad();
}

}  // namespace msadet
