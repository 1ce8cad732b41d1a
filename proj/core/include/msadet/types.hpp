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
#include <string>
#include <vector>

#include "msadet/geometry.hpp"

namespace msadet {

/// Axis-aligned box. `size` holds full extents in metres.
struct Box3D {
  Vec3 center{};
  Vec3 size{1.0, 1.0, 1.0};
  std::size_t class_id = 0;
  double score = 1.0;

  Vec3 lo() const { return {center[0] - size[0] / 2, center[1] - size[1] / 2, center[2] - size[2] / 2}; }
  Vec3 hi() const { return {center[0] + size[0] / 2, center[1] + size[1] / 2, center[2] + size[2] / 2}; }
  bool contains(const Vec3& p) const;
  double volume() const { return size[0] * size[1] * size[2]; }

  friend bool operator==(const Box3D&, const Box3D&) = default;
};

/// A point cloud with its ground-truth boxes.
struct Scene {
  std::string id;
  std::vector<Vec3> points;
  std::vector<Box3D> boxes;

  friend bool operator==(const Scene&, const Scene&) = default;
};

struct DetectionResult {
  std::string scene_id;
  std::vector<Box3D> boxes;
  std::size_t n_candidates = 0;  // queries before score thresholding
  double seconds = 0.0;
};

}  // namespace msadet
