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
// Text interchange formats: scenes, detection / ground-truth box lists and the
// training loss log. Numbers are written in shortest round-trip decimal form,
// so read(write(x)) == x exactly.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msadet/training.hpp"
#include "msadet/types.hpp"

namespace msadet {

std::string format_double(double v);
/// Parses a whole token as a double / unsigned; throws ParseError(line).
double parse_double(std::string_view token, std::size_t line);
std::uint64_t parse_u64(std::string_view token, std::size_t line);

/// Replaces `path` with `content` via a sibling temporary and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

// Scene file: "LODS1 n_points n_boxes", then "x y z" lines, then
// "class_id cx cy cz sx sy sz" lines. The scene id is not stored.
std::string format_scene(const Scene& scene);
Scene parse_scene(std::string_view text, std::string id = {});
void save_scene(const std::filesystem::path& path, const Scene& scene);
/// The id defaults to the file stem.
Scene load_scene(const std::filesystem::path& path);

/// Loads a single scene file or every *.lods file of a directory (sorted by name).
std::vector<Scene> load_scenes(const std::filesystem::path& path);

// Box lists: "scene_id class_id score cx cy cz sx sy sz" per detection; the
// ground-truth variant omits the score. Blank lines and '#' comments are skipped.
struct SceneBoxes {
  std::string scene_id;
  std::vector<Box3D> boxes;
};

std::string format_boxes(std::span<const SceneBoxes> scenes, bool with_score);
/// Groups lines by scene id in order of first appearance.
std::vector<SceneBoxes> parse_boxes(std::string_view text, bool with_score);

/// Boxes of `order`'s scenes in that order; scenes absent from `boxes` are empty.
std::vector<std::vector<Box3D>> align_boxes(std::span<const SceneBoxes> boxes, std::span<const std::string> order);

/// "step,loss,lr" header plus one line per entry.
std::string format_loss_log(std::span<const TrainLogEntry> log);
std::vector<TrainLogEntry> parse_loss_log(std::string_view text);

}  // namespace msadet
