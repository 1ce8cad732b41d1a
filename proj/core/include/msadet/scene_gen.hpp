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
#include <span>
#include <string>
#include <vector>

#include "msadet/types.hpp"

namespace msadet {

struct ClassTemplate {
  std::string name;  // report category
  Vec3 size;         // canonical full extents, metres
  bool small;
};

/// Six box-like furniture proxies, indexed by class id.
std::span<const ClassTemplate> desk_taxonomy();
std::vector<std::string> desk_class_names();

struct SceneSpec {
  std::uint64_t seed = 0;
  std::size_t n_points = 2048;
  std::size_t min_objects = 2;
  std::size_t max_objects = 5;
  /// At least this many objects are drawn from the small classes.
  std::size_t min_small_objects = 0;
  std::vector<std::size_t> class_set{0, 1, 2, 3, 4, 5};
  Vec3 room_extent{6.0, 6.0, 2.5};
  double noise_sigma = 0.01;
  /// Share of points sampled on object surfaces, split evenly per object.
  double object_point_fraction = 0.6;

  void validate() const;
};

/// Places non-overlapping axis-aligned boxes on the floor with class sizes
/// jittered by ±20%, samples points on their exposed faces and on the floor and
/// walls, and adds Gaussian noise. Deterministic in `spec.seed`.
Scene generate_scene(const SceneSpec& spec);

/// Scenes with seeds spec.seed, spec.seed + 1, ...
std::vector<Scene> generate_dataset(const SceneSpec& spec, std::size_t n_scenes);

}  // namespace msadet
