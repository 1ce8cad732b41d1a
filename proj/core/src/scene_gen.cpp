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
#include "msadet/scene_gen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "msadet/errors.hpp"

namespace msadet {
namespace {

const std::array<ClassTemplate, 6> kTaxonomy = {{
    {"cab", {0.8, 0.5, 1.0}, false},
    {"bed", {2.0, 1.5, 0.5}, false},
    {"chair", {0.5, 0.5, 0.85}, true},
    {"sofa", {1.9, 0.9, 0.8}, false},
    {"table", {1.2, 0.8, 0.75}, false},
    {"grbin", {0.3, 0.3, 0.4}, true},
}};

constexpr std::size_t kMaxAttempts = 1000;
constexpr double kWallMargin = 0.05;
constexpr double kGap = 0.1;

bool footprints_overlap(const Box3D& a, const Box3D& b) {
  for (int k = 0; k < 2; ++k) {
    if (std::abs(a.center[k] - b.center[k]) >= 0.5 * (a.size[k] + b.size[k]) + kGap) return false;
  }
  return true;
}

// A point on one of the five exposed faces (no bottom), area-weighted.
Vec3 sample_box_surface(const Box3D& box, std::mt19937_64& rng) {
  const double sx = box.size[0], sy = box.size[1], sz = box.size[2];
  const std::array<double, 5> area = {sx * sy, sx * sz, sx * sz, sy * sz, sy * sz};
  std::discrete_distribution<int> face(area.begin(), area.end());
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const Vec3 c = box.center;
  const double a = u(rng), b = u(rng);
  switch (face(rng)) {
    case 0: return {c[0] + a * sx, c[1] + b * sy, c[2] + 0.5 * sz};
    case 1: return {c[0] + a * sx, c[1] - 0.5 * sy, c[2] + b * sz};
    case 2: return {c[0] + a * sx, c[1] + 0.5 * sy, c[2] + b * sz};
    case 3: return {c[0] - 0.5 * sx, c[1] + a * sy, c[2] + b * sz};
    default: return {c[0] + 0.5 * sx, c[1] + a * sy, c[2] + b * sz};
  }
}

Vec3 sample_room_shell(const Vec3& room, std::mt19937_64& rng) {
  const double w = room[0], d = room[1], h = room[2];
  const std::array<double, 5> area = {w * d, w * h, w * h, d * h, d * h};
  std::discrete_distribution<int> face(area.begin(), area.end());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double a = u(rng), b = u(rng);
  switch (face(rng)) {
    case 0: return {a * w, b * d, 0.0};
    case 1: return {a * w, 0.0, b * h};
    case 2: return {a * w, d, b * h};
    case 3: return {0.0, a * d, b * h};
    default: return {w, a * d, b * h};
  }
}

}  // namespace

std::span<const ClassTemplate> desk_taxonomy() { return kTaxonomy; }

std::vector<std::string> desk_class_names() {
  std::vector<std::string> names;
  for (const auto& c : kTaxonomy) names.push_back(c.name);
  return names;
}

void SceneSpec::validate() const {
  if (min_objects > max_objects) throw ConfigError("scene spec: min_objects > max_objects");
  if (min_small_objects > max_objects) throw ConfigError("scene spec: min_small_objects > max_objects");
  if (!(noise_sigma >= 0.0)) throw ConfigError("scene spec: noise_sigma must be >= 0");
  if (n_points == 0) throw ConfigError("scene spec: n_points must be positive");
  if (!(object_point_fraction >= 0.0 && object_point_fraction <= 1.0)) {
    throw ConfigError("scene spec: object_point_fraction must lie in [0, 1]");
  }
  if (max_objects > 0 && class_set.empty()) throw ConfigError("scene spec: empty class set");
  bool has_small = false;
  for (auto c : class_set) {
    if (c >= kTaxonomy.size()) throw ConfigError("scene spec: unknown class id " + std::to_string(c));
    has_small = has_small || kTaxonomy[c].small;
  }
  if (min_small_objects > 0 && !has_small) throw ConfigError("scene spec: no small class to satisfy min_small_objects");
  for (double e : room_extent) {
    if (!(e > 0.0)) throw ConfigError("scene spec: room extents must be positive");
  }
}

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  Scene scene;
  scene.id = "scene_" + std::to_string(spec.seed);

  std::uniform_int_distribution<std::size_t> count(spec.min_objects, spec.max_objects);
  const std::size_t n_objects = count(rng);
  std::vector<std::size_t> small_classes;
  for (auto c : spec.class_set) {
    if (kTaxonomy[c].small) small_classes.push_back(c);
  }
  std::uniform_real_distribution<double> jitter(0.8, 1.2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t attempts = 0;
  while (scene.boxes.size() < n_objects) {
    if (++attempts > kMaxAttempts) {
      throw GenerationError("could not place " + std::to_string(n_objects) + " objects for seed " +
                            std::to_string(spec.seed));
    }
    const bool need_small = scene.boxes.size() < spec.min_small_objects;
    const auto& pool = need_small ? small_classes : spec.class_set;
    const std::size_t cls = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    Box3D box;
    box.class_id = cls;
    for (int k = 0; k < 3; ++k) box.size[k] = kTaxonomy[cls].size[k] * jitter(rng);
    if (unit(rng) < 0.5) std::swap(box.size[0], box.size[1]);
    bool fits = true;
    for (int k = 0; k < 2; ++k) {
      const double free = spec.room_extent[k] - box.size[k] - 2 * kWallMargin;
      if (free <= 0.0) fits = false;
      box.center[k] = kWallMargin + 0.5 * box.size[k] + unit(rng) * std::max(free, 0.0);
    }
    box.center[2] = 0.5 * box.size[2];
    if (box.size[2] > spec.room_extent[2]) fits = false;
    if (!fits) continue;
    const bool clash = std::any_of(scene.boxes.begin(), scene.boxes.end(),
                                   [&](const Box3D& other) { return footprints_overlap(box, other); });
    if (!clash) scene.boxes.push_back(box);
  }

  const std::size_t on_objects =
      n_objects == 0 ? 0 : static_cast<std::size_t>(std::llround(spec.object_point_fraction * spec.n_points));
  scene.points.reserve(spec.n_points);
  for (std::size_t i = 0; i < on_objects; ++i) {
    scene.points.push_back(sample_box_surface(scene.boxes[i % n_objects], rng));
  }
  while (scene.points.size() < spec.n_points) scene.points.push_back(sample_room_shell(spec.room_extent, rng));
  if (spec.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (auto& p : scene.points) {
      for (auto& v : p) v += noise(rng);
    }
  }
  return scene;
}

std::vector<Scene> generate_dataset(const SceneSpec& spec, std::size_t n_scenes) {
  std::vector<Scene> out;
  out.reserve(n_scenes);
  for (std::size_t i = 0; i < n_scenes; ++i) {
    SceneSpec s = spec;
    s.seed = spec.seed + i;
    out.push_back(generate_scene(s));
  }
  return out;
}

}  // namespace msadet
