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

#include <optional>
#include <string>
#include <vector>

#include "robustm/estimate.hpp"
#include "robustm/io.hpp"

namespace robustm {

struct ForecastConfig {
  int window = 120;
  LossSpec loss = LossSpec::lad();
  ModelSpec model;
  std::vector<std::string> x_cols;
  std::vector<std::string> z_cols;
  std::string y_col = "y";
  /// Passed through to the per-t dump when present in the input.
  std::string date_col = "date";
  /// Appends a column of ones after z_cols; model.d2 must count it.
  bool intercept = false;
  /// Runs one quantile-loss forecast per level instead of `loss`.
  std::vector<double> quantile_levels;
  FitOptions fit_options;
  int threads = 1;

  void validate() const;
};

struct ForecastSeries {
  int window = 0;
  LossSpec loss = LossSpec::lad();
  /// 1-based row numbers of the forecast targets.
  std::vector<int> t;
  std::vector<std::string> dates;
  Eigen::VectorXd pred_errors;
  Eigen::VectorXd bench_errors;
  int fallback_count = 0;
};

struct ForecastRow {
  int window = 0;
  LossSpec loss = LossSpec::lad();
  std::optional<double> tau;
  double pr2 = 0.0;
  int n_forecasts = 0;
  int fallback_count = 0;
};

struct ForecastReport {
  std::vector<ForecastRow> rows;
  std::vector<ForecastSeries> series;
};

/// Minimizer of sum_t rho(y_t - c) over constants c: mean, median (midpoint
/// for even sizes), lower tau-quantile order statistic, or Huber location.
double constant_benchmark(const Eigen::VectorXd& y, const LossSpec& loss);

/// For each row t after the first `window`, fits on the preceding `window`
/// rows and records y_t minus the model and benchmark predictions. Windows
/// whose fit throws or does not converge use the benchmark prediction.
ForecastSeries rolling_forecast(const CsvTable& data, const ForecastConfig& config);

/// 1 - sum rho(pred) / sum rho(bench).
double pseudo_r2(const Eigen::VectorXd& pred_errors, const Eigen::VectorXd& bench_errors,
                 const LossSpec& loss);

/// One row per quantile level, or a single row for `loss`.
ForecastReport run_forecast(const CsvTable& data, const ForecastConfig& config);

/// Header window,loss,tau,pr2,n_forecasts,fallback_count.
std::string report_to_csv(const ForecastReport& report);
/// Header t,date,pred_err,bench_err.
std::string series_to_csv(const ForecastSeries& series);

}  // namespace robustm
