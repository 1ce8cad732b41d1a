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
#include "msadet/checkpoint.hpp"

#include <algorithm>
#include <sstream>

#include "msadet/errors.hpp"
#include "msadet/io.hpp"
#include "msadet/run_config.hpp"

namespace msadet {

std::string serialize_checkpoint(const Detector& model) {
  std::ostringstream out(std::ios::binary);
  out << "LODCKPT 1\n" << format_model_config(model.config()) << "seed = " << model.seed() << '\n';
  for (const auto& [name, t] : model.params().entries()) out << "param " << name << '\n';
  out << "end\n";
  for (const auto& entry : model.params().entries()) write_tensor(out, entry.second);
  return out.str();
}

Detector deserialize_checkpoint(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  std::string line;
  std::size_t number = 1;
  if (!std::getline(in, line) || line != "LODCKPT 1") throw ParseError("expected checkpoint header 'LODCKPT 1'", 1);
  std::string config_text;
  std::vector<std::string> names;
  std::optional<std::uint64_t> seed;
  std::size_t config_start = 0;
  while (true) {
    if (!std::getline(in, line)) throw ParseError("checkpoint manifest is missing 'end'", number + 1);
    ++number;
    if (line == "end") break;
    if (line.rfind("param ", 0) == 0) {
      names.push_back(line.substr(6));
    } else if (line.rfind("seed = ", 0) == 0) {
      seed = parse_u64(std::string_view(line).substr(7), number);
    } else {
      if (config_start == 0) config_start = number;
      config_text += line + '\n';
    }
  }
  if (!seed) throw ParseError("checkpoint manifest has no seed", number);
  auto entries = parse_key_values(config_text);
  for (auto& kv : entries) kv.line += config_start - 1;
  Detector model(parse_model_config(entries), *seed);

  const auto& params = model.params().entries();
  if (names.size() != params.size()) {
    throw ParseError("checkpoint lists " + std::to_string(names.size()) + " tensors, model has " +
                         std::to_string(params.size()),
                     0);
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] != params[i].first) {
      throw ParseError("checkpoint tensor " + std::to_string(i) + " is '" + names[i] + "', expected '" +
                           params[i].first + "'",
                       0);
    }
    Tensor loaded = read_tensor(in);
    Tensor target = params[i].second;
    if (loaded.shape() != target.shape()) {
      throw ParseError("tensor '" + names[i] + "' has shape " + shape_to_string(loaded.shape()) + ", expected " +
                           shape_to_string(target.shape()),
                       0);
    }
    std::copy(loaded.data().begin(), loaded.data().end(), target.data().begin());
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("trailing bytes after the last tensor", 0);
  return model;
}

void save_checkpoint(const std::filesystem::path& path, const Detector& model) {
  write_file_atomic(path, serialize_checkpoint(model));
}

Detector load_checkpoint(const std::filesystem::path& path) {
  try {
    return deserialize_checkpoint(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

}  // namespace msadet
