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
#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "msadet/eval.hpp"

namespace msadet {
namespace {

const std::array<std::string, 18> kCategories = {"cab",  "bed",     "chair",  "sofa",   "table",  "door",
                                                  "window", "bkshf", "pic",    "contr",  "desk",   "curtain",
                                                  "fridge", "shower", "toilet", "sink",  "bath",   "grbin"};

std::size_t category_rank(const std::string& name) {
  const auto it = std::find(kCategories.begin(), kCategories.end(), name);
  if (it == kCategories.end()) throw std::invalid_argument("unknown report category '" + name + "'");
  return static_cast<std::size_t>(it - kCategories.begin());
}

std::string percent(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * *v);
  return buf;
}

std::vector<std::vector<std::string>> cells(const ReportTable& table) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> header{"Method"};
  header.insert(header.end(), table.columns.begin(), table.columns.end());
  header.emplace_back("mAP");
  out.push_back(std::move(header));
  for (const auto& row : table.rows) {
    std::vector<std::string> line{row.method};
    for (const auto& col : table.columns) {
      std::optional<double> v;
      for (const auto& [name, ap] : row.ap_by_class) {
        if (name == col) v = ap;
      }
      line.push_back(percent(v));
    }
    line.push_back(percent(row.map));
    out.push_back(std::move(line));
  }
  return out;
}

}  // namespace

std::span<const std::string> report_categories() { return kCategories; }

ReportRow make_report_row(std::string method, const ThresholdResult& result, std::span<const std::string> class_names) {
  ReportRow row;
  row.method = std::move(method);
  row.map = result.map;
  for (const auto& c : result.per_class) {
    if (!c.ap) continue;
    if (c.class_id >= class_names.size()) {
      throw std::invalid_argument("no report name for class id " + std::to_string(c.class_id));
    }
    category_rank(class_names[c.class_id]);
    row.ap_by_class.emplace_back(class_names[c.class_id], c.ap);
  }
  return row;
}

ReportTable make_report_table(std::string title, std::vector<ReportRow> rows) {
  ReportTable t;
  t.title = std::move(title);
  std::vector<std::size_t> ranks;
  for (const auto& row : rows) {
    for (const auto& [name, _] : row.ap_by_class) ranks.push_back(category_rank(name));
  }
  std::sort(ranks.begin(), ranks.end());
  ranks.erase(std::unique(ranks.begin(), ranks.end()), ranks.end());
  for (auto r : ranks) t.columns.push_back(kCategories[r]);
  t.rows = std::move(rows);
  return t;
}

std::string render_csv(const ReportTable& table) {
  std::ostringstream os;
  for (const auto& line : cells(table)) {
    for (std::size_t i = 0; i < line.size(); ++i) os << (i ? "," : "") << line[i];
    os << '\n';
  }
  return os.str();
}

std::string render_text(const ReportTable& table) {
  const auto grid = cells(table);
  std::vector<std::size_t> width(grid[0].size(), 0);
  for (const auto& line : grid) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::ostringstream os;
  if (!table.title.empty()) os << table.title << '\n';
  for (std::size_t r = 0; r < grid.size(); ++r) {
    for (std::size_t i = 0; i < grid[r].size(); ++i) {
      const auto& cell = grid[r][i];
      if (i == 0) {
        os << cell << std::string(width[i] - cell.size(), ' ');
      } else {
        os << " | " << std::string(width[i] - cell.size(), ' ') << cell;
      }
    }
    os << '\n';
    if (r == 0) {
      std::size_t total = width[0];
      for (std::size_t i = 1; i < width.size(); ++i) total += 3 + width[i];
      os << std::string(total, '-') << '\n';
    }
  }
  return os.str();
}

}  // namespace msadet
