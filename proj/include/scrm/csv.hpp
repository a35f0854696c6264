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

#ifndef SCRM_CSV_HPP
#define SCRM_CSV_HPP

#include <string>
#include <vector>

namespace scrm {

inline constexpr const char* kCsvSchemaHeader = "# scrm-lab schema v1";

/// Formats a double with 12 significant digits, '.' decimal separator.
std::string csv_number(double v);

/// Minimal CSV assembly: schema comment line, one header row, then data
/// rows. Everything is buffered and written atomically on save().
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  std::string render() const;
  void save(const std::string& path) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace scrm

#endif  // SCRM_CSV_HPP
