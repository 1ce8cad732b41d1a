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
// Run configuration: flat "key = value" lines, '#' comments, dotted keys
// (model.*, train.*, eval.*, data.*, paths.*).

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "msadet/eval.hpp"
#include "msadet/model.hpp"
#include "msadet/scene_gen.hpp"
#include "msadet/training.hpp"

namespace msadet {

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Throws ParseError for lines without '=', empty keys and duplicate keys.
std::vector<KeyValue> parse_key_values(std::string_view text);

struct DataConfig {
  SceneSpec scene;
  std::size_t n_scenes = 8;
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  EvalConfig eval;
  DataConfig data;
  /// paths.<name>, resolved against the config file's directory.
  std::map<std::string, std::filesystem::path> paths;
};

/// Defaults: desk taxonomy class names, everything else as in the structs.
RunConfig default_run_config();

/// Applies one setting; throws ParseError(line) for unknown keys or bad values.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value, std::size_t line = 0);

/// `seed` overrides train.seed; one of the two is mandatory. Paths must exist
/// (for paths.out*, the parent directory must). Validates the model config.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir,
                           std::optional<std::uint64_t> seed = std::nullopt);
RunConfig load_run_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed = std::nullopt);

/// model.* lines in a fixed order; parse_model_config inverts it exactly.
std::string format_model_config(const ModelConfig& cfg);
ModelConfig parse_model_config(std::span<const KeyValue> entries);

}  // namespace msadet
