// Copyright 2026 The scrm-lab Authors.
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

#include "scrm/csv.hpp"

#include <cstdio>
#include <fstream>

#include "scrm/common.hpp"

namespace scrm {

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size())
    throw Error("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                std::to_string(header_.size()));
  rows_.push_back(std::move(cells));
}

std::string CsvTable::render() const {
  std::string out = kCsvSchemaHeader;
  out += "\n";
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) out += ",";
    out += header_[i];
  }
  out += "\n";
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      out += row[i];
    }
    out += "\n";
  }
  return out;
}

void CsvTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << render();
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace scrm
