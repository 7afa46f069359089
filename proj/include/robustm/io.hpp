// Copyright 2026 The robustm Authors
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

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "robustm/model.hpp"

namespace robustm {

/// Shortest round-trip text for a double (17 significant digits at most).
std::string format_double(double x);

/// Header-plus-rows CSV held as strings. No quoting support; fields may not
/// contain commas.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column_index(const std::string& name) const;  // -1 when absent
  /// Numeric column; throws ConfigError on a missing column or a bad cell.
  Eigen::VectorXd numeric(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// "y,x1..,z1.." layout.
std::string dataset_to_csv(const Dataset& data);
void write_dataset(const std::filesystem::path& path, const Dataset& data);

/// Reads columns y, x1..x{d1}, z1..z{d2}. With d1 or d2 negative the
/// dimensions are inferred from the header.
Dataset read_dataset(const std::filesystem::path& path, int d1 = -1, int d2 = -1);

/// Sibling metadata file: data.csv -> data.json.
std::filesystem::path sidecar_path(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& value);

std::string version_string();

}  // namespace robustm
