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
// Checkpoint file: a UTF-8 manifest
//
//   LODCKPT 1
//   model.<key> = <value>      (full model config)
//   seed = <u64>
//   param <name>               (one per tensor, in blob order)
//   end
//
// followed by one binary tensor blob per parameter.

#pragma once

#include <filesystem>
#include <string>

#include "msadet/model.hpp"

namespace msadet {

std::string serialize_checkpoint(const Detector& model);
Detector deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Detector& model);
Detector load_checkpoint(const std::filesystem::path& path);

}  // namespace msadet
