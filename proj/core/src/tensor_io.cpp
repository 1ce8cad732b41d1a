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
#include <array>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>

#include "msadet/errors.hpp"
#include "msadet/tensor.hpp"

namespace msadet {
namespace {

constexpr std::array<char, 4> kMagic = {'L', 'O', 'D', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw ParseError("truncated tensor blob", 0);
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

}  // namespace

void write_tensor(std::ostream& out, const Tensor& t) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
  for (auto e : t.shape()) put_le<std::uint64_t>(out, e);
  for (double v : t.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
}

Tensor read_tensor(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw ParseError("bad tensor magic", 0);
  const auto version = get_le<std::uint32_t>(in);
  if (version != kVersion) throw ParseError("unsupported tensor version " + std::to_string(version), 0);
  const auto rank = get_le<std::uint32_t>(in);
  if (rank > 8) throw ParseError("implausible tensor rank " + std::to_string(rank), 0);
  Shape shape(rank);
  std::uint64_t n = 1;
  for (auto& e : shape) {
    e = get_le<std::uint64_t>(in);
    n *= e;
  }
  if (n > (std::uint64_t{1} << 32)) throw ParseError("implausible tensor size", 0);
  std::vector<double> data(n);
  for (auto& v : data) v = std::bit_cast<double>(get_le<std::uint64_t>(in));
  return Tensor::from_data(std::move(shape), std::move(data));
}

}  // namespace msadet
