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

#include "robustm/montecarlo.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include "robustm/error.hpp"

namespace robustm {

void McConfig::validate() const {
  if (reps < 2) throw ConfigError("mc.reps must be at least 2");
  if (n_list.empty()) throw ConfigError("mc.n_list must not be empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 50) throw ConfigError("mc.n_list entries must be at least 50");
    if (i > 0 && n_list[i] <= n_list[i - 1]) {
      throw ConfigError("mc.n_list must be strictly ascending");
    }
  }
  if (losses.empty()) throw ConfigError("mc.losses must not be empty");
  if (laws.empty()) throw ConfigError("mc.laws must not be empty");
  if (threads < 1) throw ConfigError("mc.threads must be at least 1");
  if (error_scale && !(*error_scale > 0.0 && std::isfinite(*error_scale))) {
    throw ConfigError("mc.error_scale must be positive");
  }
  fit_options.validate();
}

const McRow& McTable::find(const std::string& param, const LossSpec& loss, ErrorLaw law,
                           int n) const {
  for (const auto& row : rows) {
    if (row.param == param && row.loss == loss && row.law == law && row.n == n) return row;
  }
  throw ConfigError("mc table has no cell (" + param + ", " + loss.to_string() + ", " +
                    to_string(law) + ", n=" + std::to_string(n) + ")");
}

namespace {

struct Cell {
  LossSpec loss;
  ErrorLaw law;
  int n;
};

struct Outcome {
  bool failed = true;
  Eigen::VectorXd error;
};

std::uint64_t loss_key(const LossSpec& loss) {
  return (static_cast<std::uint64_t>(loss.kind()) << 56) ^ std::bit_cast<std::uint64_t>(loss.param());
}

Outcome run_one(const McConfig& config, const Cell& cell, int rep) {
  const std::uint64_t seed =
      substream_seed(config.base_seed, {static_cast<std::uint64_t>(config.example),
                                        static_cast<std::uint64_t>(cell.law),
                                        static_cast<std::uint64_t>(cell.n), loss_key(cell.loss),
                                        static_cast<std::uint64_t>(rep)});
  DgpConfig dgp = DgpConfig::reference_design(cell.n, cell.law);
  if (config.error_scale) dgp.error_scale = *config.error_scale;
  if (cell.loss.kind() == LossKind::kQuantile) dgp.quantile_recentering = cell.loss.param();
  const ModelSpec model = example_model(config.example);
  const ParamVector truth = example_truth(config.example);

  Outcome out;
  try {
    const Simulation sim = simulate(dgp, model, truth, seed);
    FitOptions opts = config.fit_options;
    opts.loss = cell.loss;
    FitResult r = fit(model, sim.data, opts);
    if (!r.converged) return out;
    for (std::size_t k = 0; k < r.params.theta1.size(); ++k) {
      if (r.params.theta1[k].dot(truth.theta1[k]) < 0.0) r.params.theta1[k] *= -1.0;
    }
    for (std::size_t k = 0; k < r.params.theta2.size(); ++k) {
      if (r.params.theta2[k].dot(truth.theta2[k]) < 0.0) r.params.theta2[k] *= -1.0;
    }
    out.error = r.params.flatten() - truth.flatten();
    out.failed = false;
  } catch (const Error&) {
  }
  return out;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.8g", x);
  return buf;
}

}  // namespace

McTable run_replications(const McConfig& config, const McProgress& progress) {
  config.validate();
  std::vector<Cell> cells;
  for (const auto& loss : config.losses) {
    for (ErrorLaw law : config.laws) {
      for (int n : config.n_list) cells.push_back({loss, law, n});
    }
  }
  const int total = static_cast<int>(cells.size()) * config.reps;
  std::vector<Outcome> outcomes(total);
  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (int task = next++; task < total; task = next++) {
      outcomes[task] = run_one(config, cells[task / config.reps], task % config.reps);
      const int finished = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, total);
      }
    }
  };
  if (config.threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < config.threads; ++i) pool.emplace_back(worker);
  }

  const ModelSpec model = example_model(config.example);
  const auto labels = model.param_labels();
  McTable table;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      McRow row;
      row.param = labels[p];
      row.loss = cells[c].loss;
      row.law = cells[c].law;
      row.n = cells[c].n;
      double sum = 0.0;
      for (int r = 0; r < config.reps; ++r) {
        const Outcome& o = outcomes[c * config.reps + r];
        if (o.failed) {
          ++row.failures;
          continue;
        }
        ++row.reps_used;
        sum += o.error[static_cast<Eigen::Index>(p)];
      }
      if (row.reps_used == 0) {
        row.bias = row.sd = row.mse = std::nan("");
      } else {
        row.bias = sum / row.reps_used;
        double ss = 0.0;
        for (int r = 0; r < config.reps; ++r) {
          const Outcome& o = outcomes[c * config.reps + r];
          if (o.failed) continue;
          const double d = o.error[static_cast<Eigen::Index>(p)] - row.bias;
          ss += d * d;
        }
        row.sd = row.reps_used > 1 ? std::sqrt(ss / (row.reps_used - 1)) : 0.0;
        row.mse = row.bias * row.bias + ss / row.reps_used;
      }
      row.flagged = row.failures * 5 > config.reps;
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

std::string summarize(const McTable& table, SummaryFormat format, int scale_power) {
  if (table.rows.empty()) throw ConfigError("summarize: empty table");
  const double factor = std::pow(10.0, scale_power);
  std::string out;
  const bool md = format == SummaryFormat::kMarkdown;
  if (md) {
    out += "| param | loss | law | n | bias | sd | mse | reps_used | failures |\n";
    out += "|---|---|---|---:|---:|---:|---:|---:|---:|\n";
  } else {
    out += "param,loss,law,n,bias,sd,mse,reps_used,failures\n";
  }
  bool any_flag = false;
  for (const auto& row : table.rows) {
    const std::string fields[] = {row.param,
                                  row.loss.to_string(),
                                  to_string(row.law),
                                  std::to_string(row.n),
                                  fmt(row.bias * factor),
                                  fmt(row.sd * factor),
                                  fmt(row.mse * factor),
                                  std::to_string(row.reps_used),
                                  std::to_string(row.failures) + (md && row.flagged ? " (!)" : "")};
    any_flag = any_flag || row.flagged;
    for (std::size_t i = 0; i < std::size(fields); ++i) {
      if (md) {
        out += "| " + fields[i] + " ";
      } else {
        if (i > 0) out += ',';
        out += fields[i];
      }
    }
    out += md ? "|\n" : "\n";
  }
  if (md) {
    if (scale_power != 0) out += "\nbias, sd and mse are scaled by 10^" + std::to_string(scale_power) + ".\n";
    if (any_flag) out += "\n(!) more than 20% of replications failed in this cell.\n";
  }
  return out;
}

double rate_exponent(const McTable& table, const std::string& param, const LossSpec& loss,
                     ErrorLaw law, int n_a, int n_b) {
  if (n_a <= 0 || n_b <= 0 || n_a == n_b) {
    throw ConfigError("rate_exponent: sample sizes must be positive and distinct");
  }
  const double a = table.find(param, loss, law, n_a).mse;
  const double b = table.find(param, loss, law, n_b).mse;
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw UndefinedError("rate_exponent: mse of " + param + " is zero or undefined");
  }
  return std::log(a / b) / std::log(static_cast<double>(n_b) / n_a);
}

nlohmann::json mc_config_to_json(const McConfig& config) {
  nlohmann::json losses = nlohmann::json::array();
  for (const auto& l : config.losses) losses.push_back(l.to_string());
  nlohmann::json laws = nlohmann::json::array();
  for (ErrorLaw l : config.laws) laws.push_back(to_string(l));
  nlohmann::json j = {{"example", to_string(config.example)},
                      {"n_list", config.n_list},
                      {"reps", config.reps},
                      {"losses", losses},
                      {"laws", laws},
                      {"base_seed", config.base_seed},
                      {"threads", config.threads},
                      {"fit", fit_options_to_json(config.fit_options)}};
  j["error_scale"] = config.error_scale ? nlohmann::json(*config.error_scale) : nlohmann::json();
  return j;
}

}  // namespace robustm
