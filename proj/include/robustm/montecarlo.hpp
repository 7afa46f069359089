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

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "robustm/dgp.hpp"
#include "robustm/estimate.hpp"

namespace robustm {

struct McConfig {
  ExampleId example = ExampleId::kEx51;
  std::vector<int> n_list = {100};
  int reps = 500;
  std::vector<LossSpec> losses = {LossSpec::huber(1.25)};
  std::vector<ErrorLaw> laws = {ErrorLaw::kNormal};
  std::uint64_t base_seed = 1;
  FitOptions fit_options;
  int threads = 1;
  /// Overrides the design's error scale of 0.5.
  std::optional<double> error_scale;

  void validate() const;
};

struct McRow {
  std::string param;
  LossSpec loss = LossSpec::lad();
  ErrorLaw law = ErrorLaw::kNormal;
  int n = 0;
  double bias = 0.0;
  double sd = 0.0;
  double mse = 0.0;
  int reps_used = 0;
  int failures = 0;
  /// More than 20% of the cell's replications failed.
  bool flagged = false;
};

struct McTable {
  std::vector<McRow> rows;

  /// Throws ConfigError when the cell is absent.
  const McRow& find(const std::string& param, const LossSpec& loss, ErrorLaw law, int n) const;
};

/// Called after each finished replication with (done, total).
using McProgress = std::function<void(int, int)>;

/// Rows are ordered by parameter, then loss, law and n in configuration order.
/// A replication fails when fit throws or does not converge; failures are
/// counted and excluded from the moments.
McTable run_replications(const McConfig& config, const McProgress& progress = {});

enum class SummaryFormat { kCsv, kMarkdown };

/// Bias, sd and mse are multiplied by 10^scale_power.
std::string summarize(const McTable& table, SummaryFormat format, int scale_power = 0);

/// log(mse_a / mse_b) / log(n_b / n_a).
double rate_exponent(const McTable& table, const std::string& param, const LossSpec& loss,
                     ErrorLaw law, int n_a, int n_b);

nlohmann::json mc_config_to_json(const McConfig& config);

}  // namespace robustm
