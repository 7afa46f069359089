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

// robustm command-line tool. Talks to the library only through robustm.h.

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "robustm/robustm.h"

namespace {

using nlohmann::json;

enum Exit { kOk = 0, kNotConverged = 1, kUsage = 2, kIo = 3 };

int exit_code(rm_status s) {
  switch (s) {
    case RM_OK:
      return kOk;
    case RM_NOT_CONVERGED:
    case RM_ERR_RANK:
    case RM_ERR_DEGENERATE:
      return kNotConverged;
    case RM_ERR_IO:
      return kIo;
    default:
      return kUsage;
  }
}

struct ConfigDeleter {
  void operator()(rm_config* c) const { rm_config_free(c); }
};
using ConfigPtr = std::unique_ptr<rm_config, ConfigDeleter>;

// Thrown to unwind with a status already reported by the library.
struct Failure {
  rm_status status;
};

void check(rm_status s) {
  if (s != RM_OK && s != RM_NOT_CONVERGED) throw Failure{s};
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  for (char ch : text) {
    if (ch == ',') {
      out.push_back(item);
      item.clear();
    } else {
      item += ch;
    }
  }
  if (!item.empty() || !out.empty()) out.push_back(item);
  return out;
}

json number_list(const std::string& text, bool integral) {
  json out = json::array();
  for (const auto& s : split(text)) {
    std::size_t used = 0;
    try {
      if (integral) {
        out.push_back(std::stoll(s, &used));
      } else {
        out.push_back(std::stod(s, &used));
      }
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw CLI::ValidationError("'" + text + "' is not a number list");
  }
  return out;
}

json string_list(const std::string& text) {
  json out = json::array();
  for (const auto& s : split(text)) out.push_back(s);
  return out;
}

// Options shared by every configuration-driven subcommand.
struct Common {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  std::optional<std::string> loss;
  std::optional<std::string> example;
  std::optional<std::string> nonstat_links;
  std::optional<std::string> stat_links;
  std::optional<int> d1;
  std::optional<int> d2;
  std::optional<int> multistart;
  std::optional<double> tol;
  std::optional<int> max_iter;
  bool print_config = false;

  void attach(CLI::App* app, bool model_flags) {
    app->add_option("--config", config_file, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "Base seed");
    app->add_option("--set", sets, "Override a config value: /json/pointer=<json>");
    app->add_flag("--print-config", print_config, "Print the resolved configuration and exit");
    if (!model_flags) return;
    app->add_option("--loss", loss, "lad, huber:<c>, quantile:<tau>, se, or l1/l2/l3");
    app->add_option("--example", example, "Use an example model: ex51 or ex52");
    app->add_option("--nonstat-links", nonstat_links, "Comma-separated links of the integrated block");
    app->add_option("--stat-links", stat_links, "Comma-separated links of the stationary block");
    app->add_option("--d1", d1, "Dimension of the integrated regressors");
    app->add_option("--d2", d2, "Dimension of the stationary regressors");
    app->add_option("--multistart", multistart, "Number of starts");
    app->add_option("--tol", tol, "Step tolerance");
    app->add_option("--max-iter", max_iter, "Newton iterations per smoothing level");
  }
};

void set(rm_config* c, const std::string& pointer, const json& value) {
  check(rm_config_set(c, pointer.c_str(), value.dump().c_str()));
}

ConfigPtr build_config(const Common& common) {
  rm_config* raw = nullptr;
  if (!common.config_file.empty()) {
    check(rm_config_load(common.config_file.c_str(), &raw));
  } else {
    check(rm_config_create(nullptr, &raw));
  }
  ConfigPtr c(raw);
  for (const auto& s : common.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--set expects /pointer=<json>, got '" + s + "'");
    json value;
    try {
      value = json::parse(s.substr(eq + 1));
    } catch (const json::parse_error&) {
      value = s.substr(eq + 1);
    }
    set(c.get(), s.substr(0, eq), value);
  }
  if (common.seed) set(c.get(), "/seed", *common.seed);
  if (common.loss) set(c.get(), "/loss", *common.loss);
  if (common.nonstat_links) set(c.get(), "/model/nonstat_links", string_list(*common.nonstat_links));
  if (common.stat_links) set(c.get(), "/model/stat_links", string_list(*common.stat_links));
  if (common.d1) set(c.get(), "/model/d1", *common.d1);
  if (common.d2) set(c.get(), "/model/d2", *common.d2);
  if (common.example) set(c.get(), "/model/example", *common.example);
  if (common.multistart) set(c.get(), "/fit/multistart", *common.multistart);
  if (common.tol) set(c.get(), "/fit/tol", *common.tol);
  if (common.max_iter) set(c.get(), "/fit/max_iter", *common.max_iter);
  return c;
}

void print_resolved(const rm_config* c) {
  char* text = nullptr;
  check(rm_config_resolve(c, &text));
  std::cout << text << '\n';
  rm_string_free(text);
}

void report(char* summary) {
  if (summary) {
    std::cout << summary << '\n';
    rm_string_free(summary);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust M-estimation for nonlinear cointegrating regressions"};
  app.set_version_flag("--version", std::string(rm_version()));
  app.require_subcommand(1);

  // simulate
  Common sim_common;
  std::string sim_out;
  std::optional<int> sim_n;
  std::optional<std::string> sim_law;
  std::optional<double> sim_recenter;
  std::optional<double> sim_scale;
  auto* sim = app.add_subcommand("simulate", "Generate a dataset from the simulation design");
  sim_common.attach(sim, true);
  sim->add_option("--out", sim_out, "Output CSV (metadata goes to the .json sibling)")->required();
  sim->add_option("--n", sim_n, "Sample size");
  sim->add_option("--law", sim_law, "Error law: normal, mixed_normal, t2, cauchy (or d1..d4)");
  sim->add_option("--recenter", sim_recenter, "Subtract the error law's tau-quantile");
  sim->add_option("--error-scale", sim_scale, "Error scale");

  // fit
  Common fit_common;
  std::string fit_data;
  std::string fit_out;
  auto* fitc = app.add_subcommand("fit", "Fit a model to a dataset CSV");
  fit_common.attach(fitc, true);
  fitc->add_option("--data", fit_data, "Dataset CSV with columns y,x1..,z1..")->required();
  fitc->add_option("--out", fit_out, "Result JSON")->required();

  // mc
  Common mc_common;
  std::string mc_out;
  std::optional<std::string> mc_markdown;
  std::optional<std::string> mc_example;
  std::optional<std::string> mc_n;
  std::optional<int> mc_reps;
  std::optional<std::string> mc_losses;
  std::optional<std::string> mc_laws;
  std::optional<int> mc_threads;
  std::optional<std::string> mc_rate;
  std::optional<int> mc_scale;
  std::optional<double> mc_error_scale;
  bool mc_quiet = false;
  auto* mc = app.add_subcommand("mc", "Monte Carlo tables for the simulation examples");
  mc_common.attach(mc, false);
  mc->add_option("--out", mc_out, "Table CSV")->required();
  mc->add_option("--markdown", mc_markdown, "Also write a markdown table");
  mc->add_option("--example", mc_example, "ex51 or ex52");
  mc->add_option("--n", mc_n, "Comma-separated sample sizes, ascending");
  mc->add_option("--reps", mc_reps, "Replications per cell");
  mc->add_option("--losses", mc_losses, "Comma-separated losses (l1,l2,l3,se or full specs)");
  mc->add_option("--laws", mc_laws, "Comma-separated error laws (d1..d4 or names)");
  mc->add_option("--threads", mc_threads, "Worker threads");
  mc->add_option("--rate", mc_rate, "Comma-separated parameters for rate exponents");
  mc->add_option("--scale-power", mc_scale, "Multiply bias/sd/mse by 10^k in the tables");
  mc->add_option("--error-scale", mc_error_scale, "Override the error scale");
  mc->add_flag("--quiet", mc_quiet, "No progress on standard error");

  // forecast
  Common fc_common;
  std::string fc_data;
  std::string fc_out;
  std::optional<std::string> fc_dump;
  std::optional<std::string> fc_window;
  std::optional<std::string> fc_x;
  std::optional<std::string> fc_z;
  std::optional<std::string> fc_y;
  std::optional<std::string> fc_date;
  std::optional<std::string> fc_quantiles;
  std::optional<int> fc_threads;
  bool fc_intercept = false;
  auto* fc = app.add_subcommand("forecast", "Rolling-window forecasts and pseudo R^2");
  fc_common.attach(fc, true);
  fc->add_option("--data", fc_data, "Input CSV with a header row")->required();
  fc->add_option("--out", fc_out, "Report CSV")->required();
  fc->add_option("--dump", fc_dump, "Per-forecast error CSV");
  fc->add_option("--window", fc_window, "Comma-separated rolling window sizes");
  fc->add_option("--x-cols", fc_x, "Comma-separated integrated regressor columns");
  fc->add_option("--z-cols", fc_z, "Comma-separated stationary regressor columns");
  fc->add_option("--y-col", fc_y, "Response column");
  fc->add_option("--date-col", fc_date, "Date column passed through to the dump");
  fc->add_option("--quantiles", fc_quantiles, "Comma-separated quantile levels to sweep");
  fc->add_option("--threads", fc_threads, "Worker threads");
  fc->add_flag("--intercept", fc_intercept, "Append a constant stationary regressor");

  // loss-probe
  std::string probe_loss = "lad";
  std::string probe_m = "100";
  double u_min = -2.0;
  double u_max = 2.0;
  double step = 0.01;
  bool no_gap = false;
  std::optional<std::string> probe_out;
  auto* probe = app.add_subcommand("loss-probe", "Tabulate a loss and its mollified approximation");
  probe->add_option("--loss", probe_loss, "Loss specification");
  probe->add_option("--m", probe_m, "Comma-separated mollifier orders");
  probe->add_option("--u-min", u_min, "Grid start");
  probe->add_option("--u-max", u_max, "Grid end");
  probe->add_option("--step", step, "Grid step");
  probe->add_flag("--no-gap", no_gap, "Omit the gap and gap_bound columns");
  probe->add_option("--out", probe_out, "Output CSV (standard output by default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    char* summary = nullptr;
    if (*sim) {
      ConfigPtr c = build_config(sim_common);
      if (sim_n) set(c.get(), "/dgp/n", *sim_n);
      if (sim_law) set(c.get(), "/dgp/error_law", *sim_law);
      if (sim_recenter) set(c.get(), "/dgp/quantile_recentering", *sim_recenter);
      if (sim_scale) set(c.get(), "/dgp/error_scale", *sim_scale);
      if (sim_common.print_config) {
        print_resolved(c.get());
        return kOk;
      }
      check(rm_run_simulate(c.get(), sim_out.c_str(), &summary));
      report(summary);
      return kOk;
    }
    if (*fitc) {
      ConfigPtr c = build_config(fit_common);
      if (fit_common.print_config) {
        print_resolved(c.get());
        return kOk;
      }
      const rm_status s = rm_run_fit(c.get(), fit_data.c_str(), fit_out.c_str(), &summary);
      check(s);
      report(summary);
      if (s == RM_NOT_CONVERGED) std::cerr << "robustm: fit did not converge\n";
      return exit_code(s);
    }
    if (*mc) {
      ConfigPtr c = build_config(mc_common);
      if (mc_example) set(c.get(), "/mc/example", *mc_example);
      if (mc_n) set(c.get(), "/mc/n_list", number_list(*mc_n, true));
      if (mc_reps) set(c.get(), "/mc/reps", *mc_reps);
      if (mc_losses) set(c.get(), "/mc/losses", string_list(*mc_losses));
      if (mc_laws) set(c.get(), "/mc/laws", string_list(*mc_laws));
      if (mc_threads) set(c.get(), "/mc/threads", *mc_threads);
      if (mc_rate) set(c.get(), "/mc/rate", string_list(*mc_rate));
      if (mc_scale) set(c.get(), "/mc/scale_power", *mc_scale);
      if (mc_error_scale) set(c.get(), "/mc/error_scale", *mc_error_scale);
      if (mc_common.print_config) {
        print_resolved(c.get());
        return kOk;
      }
      rm_progress_fn progress = nullptr;
      if (!mc_quiet) {
        progress = [](int done, int total, void*) {
          if (done == total || done % 50 == 0) {
            std::fprintf(stderr, "\rmc: %d/%d replications", done, total);
            if (done == total) std::fputc('\n', stderr);
          }
        };
      }
      check(rm_run_mc(c.get(), mc_out.c_str(), mc_markdown ? mc_markdown->c_str() : nullptr,
                      progress, nullptr, &summary));
      report(summary);
      return kOk;
    }
    if (*fc) {
      ConfigPtr c = build_config(fc_common);
      if (fc_window) set(c.get(), "/forecast/window", number_list(*fc_window, true));
      if (fc_x) set(c.get(), "/forecast/x_cols", string_list(*fc_x));
      if (fc_z) set(c.get(), "/forecast/z_cols", string_list(*fc_z));
      if (fc_y) set(c.get(), "/forecast/y_col", *fc_y);
      if (fc_date) set(c.get(), "/forecast/date_col", *fc_date);
      if (fc_quantiles) set(c.get(), "/forecast/quantile_levels", number_list(*fc_quantiles, false));
      if (fc_threads) set(c.get(), "/forecast/threads", *fc_threads);
      if (fc_intercept) set(c.get(), "/forecast/intercept", true);
      if (fc_common.print_config) {
        print_resolved(c.get());
        return kOk;
      }
      check(rm_run_forecast(c.get(), fc_data.c_str(), fc_out.c_str(),
                            fc_dump ? fc_dump->c_str() : nullptr, &summary));
      report(summary);
      return kOk;
    }
    if (*probe) {
      const json orders = number_list(probe_m, false);
      std::vector<double> m;
      for (const auto& v : orders) m.push_back(v.get<double>());
      char* csv = nullptr;
      check(rm_loss_probe(probe_loss.c_str(), m.data(), m.size(), u_min, u_max, step, no_gap ? 0 : 1,
                          &csv));
      const std::string text = csv;
      rm_string_free(csv);
      if (probe_out) {
        std::FILE* f = std::fopen(probe_out->c_str(), "wb");
        if (!f) {
          std::cerr << "robustm: error: cannot open '" << *probe_out << "' for writing\n";
          return kIo;
        }
        const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
        if (std::fclose(f) != 0 || !ok) {
          std::cerr << "robustm: error: write to '" << *probe_out << "' failed\n";
          return kIo;
        }
      } else {
        std::cout << text;
      }
      return kOk;
    }
  } catch (const Failure& f) {
    std::cerr << "robustm: error: " << rm_last_error() << '\n';
    return exit_code(f.status);
  } catch (const CLI::ValidationError& err) {
    std::cerr << "robustm: error: " << err.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
