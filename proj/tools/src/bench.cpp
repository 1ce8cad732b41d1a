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
#include <chrono>
#include <limits>
#include <random>
#include <stdexcept>

#include "msadet/attention.hpp"
#include "msadet/cli.hpp"
#include "msadet/geometry.hpp"
#include "msadet/io.hpp"
#include "msadet/nn.hpp"

namespace msadet {
namespace {

using Clock = std::chrono::steady_clock;

struct Timing {
  std::size_t repeats = 0;
  double mean = 0.0;
  double min = std::numeric_limits<double>::infinity();
};

// At least three calls and at least ~0.2 s of work.
template <typename F>
Timing time_calls(F&& f) {
  Timing t;
  double total = 0.0;
  while (t.repeats < 3 || (total < 0.2 && t.repeats < 1000)) {
    const auto start = Clock::now();
    f();
    const double s = std::chrono::duration<double>(Clock::now() - start).count();
    total += s;
    t.min = std::min(t.min, s);
    ++t.repeats;
  }
  t.mean = total / static_cast<double>(t.repeats);
  return t;
}

std::vector<Vec3> random_cloud(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  return pts;
}

Timing run_op(std::string_view op, std::size_t n, std::mt19937_64& rng) {
  // Source sets are half the size, as between encoder and dense points.
  const std::size_t half = std::max<std::size_t>(n / 2, 3);
  if (op == "fps") {
    const auto pts = random_cloud(n, rng);
    return time_calls([&] { farthest_point_sample(pts, std::max<std::size_t>(n / 4, 1)); });
  }
  if (op == "knn") {
    const auto q = random_cloud(n, rng);
    const auto src = random_cloud(half, rng);
    return time_calls([&] { knn(q, src, 3); });
  }
  if (op == "wid") {
    const auto q = random_cloud(n, rng);
    const auto src = random_cloud(half, rng);
    const Tensor feats = uniform({half, 64}, rng, -1.0, 1.0);
    return time_calls([&] { wid_interpolate(q, src, feats, WIDConfig{}); });
  }
  if (op == "attention") {
    ParamStore store(rng());
    const auto p = AttentionParams::create(store, "bench", MHAConfig{64, 4});
    const Tensor x = uniform({n, 64}, rng, -1.0, 1.0);
    return time_calls([&] { mha(x, x, p); });
  }
  throw std::invalid_argument("unknown bench op '" + std::string(op) + "' (fps, knn, wid, attention, all)");
}

}  // namespace

std::string bench_csv(std::string_view op, std::span<const std::size_t> sizes, std::uint64_t seed) {
  std::vector<std::string_view> ops;
  if (op == "all") ops = {"fps", "knn", "wid", "attention"};
  else ops = {op};
  std::string out = "op,n_points,repeats,mean_seconds,min_seconds\n";
  for (auto o : ops) {
    std::mt19937_64 rng(seed);
    for (auto n : sizes) {
      if (n < 4) throw std::invalid_argument("bench sizes must be at least 4");
      const Timing t = run_op(o, n, rng);
      out += std::string(o) + ',' + std::to_string(n) + ',' + std::to_string(t.repeats) + ',' + format_double(t.mean) +
             ',' + format_double(t.min) + '\n';
    }
  }
  return out;
}

}  // namespace msadet
