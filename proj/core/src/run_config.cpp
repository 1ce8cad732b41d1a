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
#include "msadet/run_config.hpp"

#include <set>

#include "msadet/errors.hpp"
#include "msadet/io.hpp"

namespace msadet {
namespace {

namespace fs = std::filesystem;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_list(std::string_view v) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = v.find(',');
    out.push_back(trim(v.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

bool parse_bool(std::string_view v, std::size_t line) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ParseError("expected on/off, got '" + std::string(v) + "'", line);
}

std::size_t parse_count(std::string_view v, std::size_t line) { return static_cast<std::size_t>(parse_u64(v, line)); }

Vec3 parse_vec3(std::string_view v, std::size_t line) {
  const auto parts = split_list(v);
  if (parts.size() != 3) throw ParseError("expected three comma-separated numbers", line);
  return {parse_double(parts[0], line), parse_double(parts[1], line), parse_double(parts[2], line)};
}

bool apply_model(ModelConfig& m, std::string_view k, std::string_view v, std::size_t line) {
  if (k == "n_raw_points") m.n_raw_points = parse_count(v, line);
  else if (k == "n_encoder_points") m.n_encoder_points = parse_count(v, line);
  else if (k == "n_dense_points") m.n_dense_points = parse_count(v, line);
  else if (k == "d_model") m.d_model = parse_count(v, line);
  else if (k == "n_heads") m.n_heads = parse_count(v, line);
  else if (k == "n_encoder_layers") m.n_encoder_layers = parse_count(v, line);
  else if (k == "n_decoder_layers") m.n_decoder_layers = parse_count(v, line);
  else if (k == "n_queries") m.n_queries = parse_count(v, line);
  else if (k == "n_classes") m.n_classes = parse_count(v, line);
  else if (k == "msa_enabled") m.msa_enabled = parse_bool(v, line);
  else if (k == "masked_encoder") m.masked_encoder = parse_bool(v, line);
  else if (k == "sa_radius") m.sa_radius = parse_double(v, line);
  else if (k == "sa_group_cap") m.sa_group_cap = parse_count(v, line);
  else if (k == "sa_hidden") m.sa_hidden = parse_count(v, line);
  else if (k == "ffn_hidden") m.ffn_hidden = parse_count(v, line);
  else if (k == "n_freqs") m.n_freqs = parse_count(v, line);
  else if (k == "wid.k") m.wid.k_neighbors = parse_count(v, line);
  else if (k == "wid.power") m.wid.power = parse_double(v, line);
  else if (k == "wid.epsilon") m.wid.epsilon = parse_double(v, line);
  else if (k == "lambda_cls") m.lambda_cls = parse_double(v, line);
  else if (k == "lambda_center") m.lambda_center = parse_double(v, line);
  else if (k == "lambda_size") m.lambda_size = parse_double(v, line);
  else if (k == "score_threshold") m.score_threshold = parse_double(v, line);
  else return false;
  return true;
}

bool apply_train(TrainConfig& t, std::string_view k, std::string_view v, std::size_t line) {
  if (k == "lr") t.lr = parse_double(v, line);
  else if (k == "momentum") t.momentum = parse_double(v, line);
  else if (k == "steps") t.steps = parse_count(v, line);
  else if (k == "batch") t.batch = parse_count(v, line);
  else if (k == "seed") t.seed = parse_u64(v, line);
  else if (k == "grad_clip") t.grad_clip = parse_double(v, line);
  else if (k == "optimizer") {
    if (v == "sgd") t.optimizer = OptimizerKind::kMomentumSgd;
    else if (v == "adam") t.optimizer = OptimizerKind::kAdam;
    else throw ParseError("train.optimizer must be sgd or adam", line);
  }
  else return false;
  return true;
}

bool apply_eval(EvalConfig& e, std::string_view k, std::string_view v, std::size_t line) {
  if (k == "iou_thresholds") {
    e.iou_thresholds.clear();
    for (auto p : split_list(v)) e.iou_thresholds.push_back(parse_double(p, line));
  } else if (k == "class_names") {
    e.class_names.clear();
    for (auto p : split_list(v)) e.class_names.emplace_back(p);
  } else {
    return false;
  }
  return true;
}

bool apply_data(DataConfig& d, std::string_view k, std::string_view v, std::size_t line) {
  auto& s = d.scene;
  if (k == "seed") s.seed = parse_u64(v, line);
  else if (k == "n_scenes") d.n_scenes = parse_count(v, line);
  else if (k == "n_points") s.n_points = parse_count(v, line);
  else if (k == "min_objects") s.min_objects = parse_count(v, line);
  else if (k == "max_objects") s.max_objects = parse_count(v, line);
  else if (k == "min_small_objects") s.min_small_objects = parse_count(v, line);
  else if (k == "room_extent") s.room_extent = parse_vec3(v, line);
  else if (k == "noise_sigma") s.noise_sigma = parse_double(v, line);
  else if (k == "object_point_fraction") s.object_point_fraction = parse_double(v, line);
  else if (k == "classes") {
    s.class_set.clear();
    for (auto p : split_list(v)) s.class_set.push_back(parse_count(p, line));
  } else {
    return false;
  }
  return true;
}

}  // namespace

std::vector<KeyValue> parse_key_values(std::string_view text) {
  std::vector<KeyValue> out;
  std::set<std::string, std::less<>> seen;
  std::size_t number = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", number);
    KeyValue kv{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), number};
    if (kv.key.empty()) throw ParseError("empty key", number);
    if (!seen.insert(kv.key).second) throw ParseError("duplicate key '" + kv.key + "'", number);
    out.push_back(std::move(kv));
  }
  return out;
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.eval.class_names = desk_class_names();
  return cfg;
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value, std::size_t line) {
  const auto dot = key.find('.');
  const auto section = key.substr(0, dot);
  const auto rest = dot == std::string_view::npos ? std::string_view{} : key.substr(dot + 1);
  bool ok = false;
  if (!rest.empty()) {
    if (section == "model") ok = apply_model(cfg.model, rest, value, line);
    else if (section == "train") ok = apply_train(cfg.train, rest, value, line);
    else if (section == "eval") ok = apply_eval(cfg.eval, rest, value, line);
    else if (section == "data") ok = apply_data(cfg.data, rest, value, line);
    else if (section == "paths") {
      if (value.empty()) throw ParseError("empty path for '" + std::string(key) + "'", line);
      cfg.paths[std::string(rest)] = fs::path(std::string(value));
      ok = true;
    }
  }
  if (!ok) throw ParseError("unknown key '" + std::string(key) + "'", line);
}

RunConfig parse_run_config(std::string_view text, const fs::path& base_dir, std::optional<std::uint64_t> seed) {
  RunConfig cfg = default_run_config();
  bool has_seed = false;
  for (const auto& kv : parse_key_values(text)) {
    apply_setting(cfg, kv.key, kv.value, kv.line);
    has_seed = has_seed || kv.key == "train.seed";
  }
  if (seed) cfg.train.seed = *seed;
  else if (!has_seed) throw ConfigError("train.seed is mandatory (set it in the config or pass --seed)");

  for (auto& [name, path] : cfg.paths) {
    if (path.is_relative()) path = base_dir / path;
    const bool output = name.rfind("out", 0) == 0;
    const fs::path must_exist = output ? (path.has_parent_path() ? path.parent_path() : fs::path(".")) : path;
    if (!fs::exists(must_exist)) {
      throw ConfigError("paths." + name + ": " + must_exist.string() + " does not exist");
    }
  }
  cfg.model.validate();
  cfg.eval.validate();
  cfg.data.scene.validate();
  if (cfg.train.batch == 0) throw ConfigError("train.batch must be positive");
  return cfg;
}

RunConfig load_run_config(const fs::path& path, std::optional<std::uint64_t> seed) {
  const std::string text = read_file(path);
  try {
    return parse_run_config(text, path.parent_path(), seed);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

std::string format_model_config(const ModelConfig& m) {
  std::string out;
  auto put = [&](std::string_view k, const std::string& v) { out += "model." + std::string(k) + " = " + v + '\n'; };
  auto count = [](std::size_t v) { return std::to_string(v); };
  auto flag = [](bool v) { return std::string(v ? "on" : "off"); };
  put("n_raw_points", count(m.n_raw_points));
  put("n_encoder_points", count(m.n_encoder_points));
  put("n_dense_points", count(m.n_dense_points));
  put("d_model", count(m.d_model));
  put("n_heads", count(m.n_heads));
  put("n_encoder_layers", count(m.n_encoder_layers));
  put("n_decoder_layers", count(m.n_decoder_layers));
  put("n_queries", count(m.n_queries));
  put("n_classes", count(m.n_classes));
  put("msa_enabled", flag(m.msa_enabled));
  put("masked_encoder", flag(m.masked_encoder));
  put("sa_radius", format_double(m.sa_radius));
  put("sa_group_cap", count(m.sa_group_cap));
  put("sa_hidden", count(m.sa_hidden));
  put("ffn_hidden", count(m.ffn_hidden));
  put("n_freqs", count(m.n_freqs));
  put("wid.k", count(m.wid.k_neighbors));
  put("wid.power", format_double(m.wid.power));
  put("wid.epsilon", format_double(m.wid.epsilon));
  put("lambda_cls", format_double(m.lambda_cls));
  put("lambda_center", format_double(m.lambda_center));
  put("lambda_size", format_double(m.lambda_size));
  put("score_threshold", format_double(m.score_threshold));
  return out;
}

ModelConfig parse_model_config(std::span<const KeyValue> entries) {
  ModelConfig m;
  for (const auto& kv : entries) {
    std::string_view key = kv.key;
    if (key.rfind("model.", 0) != 0 || !apply_model(m, key.substr(6), kv.value, kv.line)) {
      throw ParseError("unknown model key '" + kv.key + "'", kv.line);
    }
  }
  m.validate();
  return m;
}

}  // namespace msadet
