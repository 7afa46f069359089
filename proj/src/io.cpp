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

#include "robustm/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "robustm/error.hpp"

namespace robustm {

std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw Error(ErrorCode::kInternal, "format_double failed");
  return std::string(buf, ptr);
}

int CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

Eigen::VectorXd CsvTable::numeric(const std::string& name) const {
  const int col = column_index(name);
  if (col < 0) throw ConfigError("csv: missing column '" + name + "'");
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string& cell = rows[r][col];
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw ConfigError("csv: column '" + name + "' row " + std::to_string(r + 1) +
                        " is not a number: '" + cell + "'");
    }
    out[static_cast<Eigen::Index>(r)] = v;
  }
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv: '" + path.string() + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.columns = split_line(line);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != table.columns.size()) {
      throw ConfigError("csv: '" + path.string() + "' line " + std::to_string(lineno) + " has " +
                        std::to_string(fields.size()) + " fields, header has " +
                        std::to_string(table.columns.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string dataset_to_csv(const Dataset& data) {
  std::string out = "y";
  for (Eigen::Index k = 0; k < data.X.cols(); ++k) out += ",x" + std::to_string(k + 1);
  for (Eigen::Index k = 0; k < data.Z.cols(); ++k) out += ",z" + std::to_string(k + 1);
  out += '\n';
  for (int t = 0; t < data.n(); ++t) {
    out += format_double(data.y[t]);
    for (Eigen::Index k = 0; k < data.X.cols(); ++k) out += "," + format_double(data.X(t, k));
    for (Eigen::Index k = 0; k < data.Z.cols(); ++k) out += "," + format_double(data.Z(t, k));
    out += '\n';
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  write_text(path, dataset_to_csv(data));
}

Dataset read_dataset(const std::filesystem::path& path, int d1, int d2) {
  const CsvTable table = read_csv(path);
  auto count_prefix = [&](char prefix) {
    int k = 0;
    while (table.column_index(std::string(1, prefix) + std::to_string(k + 1)) >= 0) ++k;
    return k;
  };
  if (d1 < 0) d1 = count_prefix('x');
  if (d2 < 0) d2 = count_prefix('z');
  Dataset data;
  data.y = table.numeric("y");
  const auto n = data.y.size();
  data.X.resize(n, d1);
  data.Z.resize(n, d2);
  for (int k = 0; k < d1; ++k) data.X.col(k) = table.numeric("x" + std::to_string(k + 1));
  for (int k = 0; k < d2; ++k) data.Z.col(k) = table.numeric("z" + std::to_string(k + 1));
  data.meta = {{"source", path.string()}};
  return data;
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  std::filesystem::path out = path;
  out.replace_extension(".json");
  return out;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  write_text(path, value.dump(2) + "\n");
}

std::string version_string() { return std::string("robustm ") + ROBUSTM_VERSION; }

}  // namespace robustm
