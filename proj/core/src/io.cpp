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
#include "msadet/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "msadet/errors.hpp"

namespace msadet {
namespace {

namespace fs = std::filesystem;

// Splits on spaces / tabs.
std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const auto end = text_.find('\n', pos_);
    line = text_.substr(pos_, end == std::string_view::npos ? std::string_view::npos : end - pos_);
    pos_ = end == std::string_view::npos ? text_.size() : end + 1;
    ++number_;
    return true;
  }
  std::size_t number() const { return number_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
};

void append_box(std::string& out, const Box3D& b) {
  for (double v : b.center) out += ' ' + format_double(v);
  for (double v : b.size) out += ' ' + format_double(v);
}

Box3D parse_box_fields(std::span<const std::string_view> f, std::size_t line) {
  Box3D b;
  b.class_id = static_cast<std::size_t>(parse_u64(f[0], line));
  for (int k = 0; k < 3; ++k) b.center[k] = parse_double(f[1 + k], line);
  for (int k = 0; k < 3; ++k) {
    b.size[k] = parse_double(f[4 + k], line);
    if (!(b.size[k] > 0.0)) throw ParseError("box extents must be positive", line);
  }
  return b;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw ParseError("expected a number, got '" + std::string(token) + "'", line);
  }
  return v;
}

std::uint64_t parse_u64(std::string_view token, std::size_t line) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw ParseError("expected a non-negative integer, got '" + std::string(token) + "'", line);
  }
  return v;
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_scene(const Scene& scene) {
  std::string out = "LODS1 " + std::to_string(scene.points.size()) + ' ' + std::to_string(scene.boxes.size()) + '\n';
  for (const auto& p : scene.points) {
    out += format_double(p[0]) + ' ' + format_double(p[1]) + ' ' + format_double(p[2]) + '\n';
  }
  for (const auto& b : scene.boxes) {
    out += std::to_string(b.class_id);
    append_box(out, b);
    out += '\n';
  }
  return out;
}

Scene parse_scene(std::string_view text, std::string id) {
  LineReader reader(text);
  std::string_view line;
  if (!reader.next(line)) throw ParseError("empty scene file", 1);
  auto head = tokens(line);
  if (head.size() != 3 || head[0] != "LODS1") throw ParseError("expected header 'LODS1 n_points n_boxes'", 1);
  const auto n_points = parse_u64(head[1], 1);
  const auto n_boxes = parse_u64(head[2], 1);

  Scene scene;
  scene.id = std::move(id);
  scene.points.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n_points, 1u << 24)));
  for (std::uint64_t i = 0; i < n_points; ++i) {
    if (!reader.next(line)) throw ParseError("unexpected end of file in point block", reader.number() + 1);
    const auto f = tokens(line);
    if (f.size() != 3) throw ParseError("point line needs 3 fields", reader.number());
    scene.points.push_back(
        {parse_double(f[0], reader.number()), parse_double(f[1], reader.number()), parse_double(f[2], reader.number())});
  }
  for (std::uint64_t i = 0; i < n_boxes; ++i) {
    if (!reader.next(line)) throw ParseError("unexpected end of file in box block", reader.number() + 1);
    const auto f = tokens(line);
    if (f.size() != 7) throw ParseError("box line needs 7 fields", reader.number());
    Box3D b = parse_box_fields(f, reader.number());
    scene.boxes.push_back(b);
  }
  while (reader.next(line)) {
    if (!tokens(line).empty()) throw ParseError("trailing content after box block", reader.number());
  }
  return scene;
}

void save_scene(const fs::path& path, const Scene& scene) { write_file_atomic(path, format_scene(scene)); }

Scene load_scene(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_scene(text, path.stem().string());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

std::vector<Scene> load_scenes(const fs::path& path) {
  if (!fs::is_directory(path)) return {load_scene(path)};
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().extension() == ".lods") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no .lods scene files in " + path.string());
  std::vector<Scene> scenes;
  for (const auto& f : files) scenes.push_back(load_scene(f));
  return scenes;
}

std::string format_boxes(std::span<const SceneBoxes> scenes, bool with_score) {
  std::string out;
  for (const auto& s : scenes) {
    for (const auto& b : s.boxes) {
      out += s.scene_id + ' ' + std::to_string(b.class_id);
      if (with_score) out += ' ' + format_double(b.score);
      append_box(out, b);
      out += '\n';
    }
  }
  return out;
}

std::vector<SceneBoxes> parse_boxes(std::string_view text, bool with_score) {
  std::vector<SceneBoxes> out;
  std::map<std::string, std::size_t, std::less<>> slot;
  LineReader reader(text);
  std::string_view line;
  const std::size_t want = with_score ? 9 : 8;
  while (reader.next(line)) {
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    auto f = tokens(line);
    if (f.empty()) continue;
    if (f.size() != want) {
      throw ParseError("expected " + std::to_string(want) + " fields, got " + std::to_string(f.size()),
                       reader.number());
    }
    std::vector<std::string_view> box_fields{f[1]};
    const std::size_t first = with_score ? 3 : 2;
    box_fields.insert(box_fields.end(), f.begin() + static_cast<std::ptrdiff_t>(first), f.end());
    Box3D b = parse_box_fields(box_fields, reader.number());
    b.score = with_score ? parse_double(f[2], reader.number()) : 1.0;
    auto [it, inserted] = slot.try_emplace(std::string(f[0]), out.size());
    if (inserted) out.push_back({std::string(f[0]), {}});
    out[it->second].boxes.push_back(b);
  }
  return out;
}

std::vector<std::vector<Box3D>> align_boxes(std::span<const SceneBoxes> boxes, std::span<const std::string> order) {
  std::map<std::string_view, const SceneBoxes*> by_id;
  for (const auto& s : boxes) by_id[s.scene_id] = &s;
  std::vector<std::vector<Box3D>> out;
  for (const auto& id : order) {
    auto it = by_id.find(id);
    out.push_back(it == by_id.end() ? std::vector<Box3D>{} : it->second->boxes);
  }
  return out;
}

std::string format_loss_log(std::span<const TrainLogEntry> log) {
  std::string out = "step,loss,lr\n";
  for (const auto& e : log) {
    out += std::to_string(e.step) + ',' + format_double(e.loss) + ',' + format_double(e.lr) + '\n';
  }
  return out;
}

std::vector<TrainLogEntry> parse_loss_log(std::string_view text) {
  LineReader reader(text);
  std::string_view line;
  if (!reader.next(line) || line.substr(0, 12) != "step,loss,lr") throw ParseError("expected header step,loss,lr", 1);
  std::vector<TrainLogEntry> out;
  while (reader.next(line)) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos) throw ParseError("expected step,loss,lr", reader.number());
    out.push_back({static_cast<std::size_t>(parse_u64(line.substr(0, c1), reader.number())),
                   parse_double(line.substr(c1 + 1, c2 - c1 - 1), reader.number()),
                   parse_double(line.substr(c2 + 1), reader.number())});
  }
  return out;
}

}  // namespace msadet
