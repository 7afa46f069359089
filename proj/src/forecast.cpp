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

#include "robustm/forecast.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

#include "robustm/error.hpp"

namespace robustm {

void ForecastConfig::validate() const {
  model.validate();
  if (model.p1() + model.p2() == 0) {
    throw ConfigError("forecast.model must contain at least one link (the benchmark is implicit)");
  }
  const int p = model.param_count();
  if (window < p + 5) {
    throw ConfigError("forecast.window must be at least " + std::to_string(p + 5) +
                      " (parameter count + 5)");
  }
  if (static_cast<int>(x_cols.size()) != model.d1) {
    throw ConfigError("forecast.x_cols has " + std::to_string(x_cols.size()) +
                      " columns, model.d1 is " + std::to_string(model.d1));
  }
  const int z_count = static_cast<int>(z_cols.size()) + (intercept ? 1 : 0);
  if (z_count != model.d2) {
    throw ConfigError("forecast.z_cols (plus intercept) has " + std::to_string(z_count) +
                      " columns, model.d2 is " + std::to_string(model.d2));
  }
  std::set<std::string> seen{y_col};
  for (const auto* cols : {&x_cols, &z_cols}) {
    for (const auto& c : *cols) {
      if (!seen.insert(c).second) throw ConfigError("forecast: column '" + c + "' used twice");
    }
  }
  for (double tau : quantile_levels) {
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("forecast.quantile_levels must lie in (0,1)");
  }
  if (threads < 1) throw ConfigError("forecast.threads must be at least 1");
  fit_options.validate();
}

double constant_benchmark(const Eigen::VectorXd& y, const LossSpec& loss) {
  if (y.size() == 0) throw ShapeError("constant_benchmark: empty sample");
  std::vector<double> s(y.begin(), y.end());
  std::sort(s.begin(), s.end());
  const auto n = s.size();
  switch (loss.kind()) {
    case LossKind::kSquaredError:
      return y.mean();
    case LossKind::kLad:
      return n % 2 == 1 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
    case LossKind::kQuantile: {
      const auto k = static_cast<std::size_t>(std::ceil(loss.param() * static_cast<double>(n)));
      return s[std::clamp<std::size_t>(k, 1, n) - 1];
    }
    case LossKind::kHuber: {
      // The score sum is nonincreasing in the location.
      double lo = s.front();
      double hi = s.back();
      auto score = [&](double c) {
        double total = 0.0;
        for (double v : s) total += subgrad(loss, v - c);
        return total;
      };
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi));
           ++it) {
        const double mid = 0.5 * (lo + hi);
        (score(mid) > 0.0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  throw Error(ErrorCode::kInternal, "constant_benchmark: unknown loss");
}

namespace {

struct Panel {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  Eigen::MatrixXd Z;
  std::vector<std::string> dates;
};

Panel load_panel(const CsvTable& data, const ForecastConfig& config) {
  Panel p;
  p.y = data.numeric(config.y_col);
  const auto n = p.y.size();
  p.X.resize(n, static_cast<Eigen::Index>(config.x_cols.size()));
  for (std::size_t k = 0; k < config.x_cols.size(); ++k) {
    p.X.col(static_cast<Eigen::Index>(k)) = data.numeric(config.x_cols[k]);
  }
  p.Z.resize(n, config.model.d2);
  for (std::size_t k = 0; k < config.z_cols.size(); ++k) {
    p.Z.col(static_cast<Eigen::Index>(k)) = data.numeric(config.z_cols[k]);
  }
  if (config.intercept) p.Z.col(config.model.d2 - 1).setOnes();
  const int date = data.column_index(config.date_col);
  p.dates.resize(static_cast<std::size_t>(n));
  if (date >= 0) {
    for (std::size_t r = 0; r < data.rows.size(); ++r) p.dates[r] = data.rows[r][date];
  }
  if (!p.y.allFinite() || !p.X.allFinite() || !p.Z.allFinite()) {
    throw ConfigError("forecast: input contains non-finite values");
  }
  return p;
}

}  // namespace

ForecastSeries rolling_forecast(const CsvTable& data, const ForecastConfig& config) {
  config.validate();
  const Panel panel = load_panel(data, config);
  const int total = static_cast<int>(panel.y.size());
  const int w = config.window;
  if (total <= w) {
    throw ConfigError("forecast.window (" + std::to_string(w) + ") must be smaller than the " +
                      std::to_string(total) + " usable rows");
  }
  const int count = total - w;
  ForecastSeries out;
  out.window = w;
  out.loss = config.loss;
  out.pred_errors.resize(count);
  out.bench_errors.resize(count);
  std::vector<char> fell_back(static_cast<std::size_t>(count), 0);

  FitOptions opts = config.fit_options;
  opts.loss = config.loss;
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      const int t = w + i;
      Dataset train;
      train.y = panel.y.segment(i, w);
      train.X = panel.X.middleRows(i, w);
      train.Z = panel.Z.middleRows(i, w);
      const double bench = constant_benchmark(train.y, config.loss);
      double pred = bench;
      try {
        const FitResult r = fit(config.model, train, opts);
        if (r.converged) {
          pred = regression_mean(config.model, r.params, panel.X.row(t).transpose(),
                                 panel.Z.row(t).transpose());
        } else {
          fell_back[i] = 1;
        }
      } catch (const Error&) {
        fell_back[i] = 1;
      }
      out.pred_errors[i] = panel.y[t] - pred;
      out.bench_errors[i] = panel.y[t] - bench;
    }
  };
  if (config.threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < config.threads; ++k) pool.emplace_back(worker);
  }
  for (int i = 0; i < count; ++i) {
    out.t.push_back(w + i + 1);
    out.dates.push_back(panel.dates[static_cast<std::size_t>(w + i)]);
    out.fallback_count += fell_back[i];
  }
  return out;
}

double pseudo_r2(const Eigen::VectorXd& pred_errors, const Eigen::VectorXd& bench_errors,
                 const LossSpec& loss) {
  if (pred_errors.size() != bench_errors.size()) {
    throw ShapeError("pseudo_r2: error series differ in length");
  }
  if (pred_errors.size() == 0) throw ShapeError("pseudo_r2: no forecasts");
  const double model = objective_value(loss, pred_errors);
  const double bench = objective_value(loss, bench_errors);
  if (!(bench > 0.0)) throw UndefinedError("pseudo_r2: benchmark loss is zero");
  return 1.0 - model / bench;
}

ForecastReport run_forecast(const CsvTable& data, const ForecastConfig& config) {
  std::vector<LossSpec> losses;
  if (config.quantile_levels.empty()) {
    losses.push_back(config.loss);
  } else {
    for (double tau : config.quantile_levels) losses.push_back(LossSpec::quantile(tau));
  }
  ForecastReport report;
  for (const auto& loss : losses) {
    ForecastConfig c = config;
    c.loss = loss;
    ForecastSeries s = rolling_forecast(data, c);
    ForecastRow row;
    row.window = s.window;
    row.loss = loss;
    if (loss.kind() == LossKind::kQuantile) row.tau = loss.param();
    row.pr2 = pseudo_r2(s.pred_errors, s.bench_errors, loss);
    row.n_forecasts = static_cast<int>(s.pred_errors.size());
    row.fallback_count = s.fallback_count;
    report.rows.push_back(row);
    report.series.push_back(std::move(s));
  }
  return report;
}

std::string report_to_csv(const ForecastReport& report) {
  std::string out = "window,loss,tau,pr2,n_forecasts,fallback_count\n";
  for (const auto& row : report.rows) {
    out += std::to_string(row.window) + ',' + row.loss.to_string() + ',' +
           (row.tau ? format_double(*row.tau) : std::string()) + ',' + format_double(row.pr2) +
           ',' + std::to_string(row.n_forecasts) + ',' + std::to_string(row.fallback_count) + '\n';
  }
  return out;
}

std::string series_to_csv(const ForecastSeries& series) {
  std::string out = "t,date,pred_err,bench_err\n";
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out += std::to_string(series.t[i]) + ',' + series.dates[i] + ',' +
           format_double(series.pred_errors[k]) + ',' + format_double(series.bench_errors[k]) +
           '\n';
  }
  return out;
}

}  // namespace robustm
