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

#include "robustm/app.hpp"

#include <algorithm>
#include <cmath>

#include "robustm/error.hpp"
#include "robustm/io.hpp"

namespace robustm {

using nlohmann::json;

json default_config() {
  return {
      {"seed", 1},
      {"model",
       {{"example", nullptr},
        {"nonstat_links", {"identity"}},
        {"stat_links", {"identity"}},
        {"d1", 2},
        {"d2", 2},
        {"share_theta1", false},
        {"truth", nullptr}}},
      {"loss", "huber:1.25"},
      {"dgp",
       {{"n", 100},
        {"d1", nullptr},
        {"d2", nullptr},
        {"rho1", nullptr},
        {"sigma1", nullptr},
        {"rho2", nullptr},
        {"sigma2", nullptr},
        {"trend", "linear"},
        {"error_law", "normal"},
        {"error_scale", 0.5},
        {"lin_proc_coeffs", json::array()},
        {"quantile_recentering", nullptr}}},
      {"fit",
       {{"m_epsilon", 0.1},
        {"tol", 1e-8},
        {"max_iter", 200},
        {"multistart", nullptr},
        {"damping", 0.5},
        {"ridge", 1e-10},
        {"initial", nullptr}}},
      {"mc",
       {{"example", "ex51"},
        {"n_list", {100}},
        {"reps", 500},
        {"losses", {"huber:1.25"}},
        {"laws", {"normal"}},
        {"threads", 1},
        {"error_scale", nullptr},
        {"scale_power", 0},
        {"rate", json::array()}}},
      {"forecast",
       {{"window", {120}},
        {"x_cols", json::array()},
        {"z_cols", json::array()},
        {"y_col", "y"},
        {"date_col", "date"},
        {"intercept", false},
        {"quantile_levels", json::array()},
        {"threads", 1}}},
  };
}

namespace {

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

void overlay(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) {
    throw ConfigError("config: '" + (path.empty() ? "/" : path) + "' must be an object");
  }
  for (const auto& [key, value] : user.items()) {
    const std::string where = path + "/" + key;
    if (!base.contains(key)) throw ConfigError("config: unknown key '" + where + "'");
    json& slot = base[key];
    if (slot.is_object()) {
      overlay(slot, value, where);
    } else if (slot.is_null() || value.is_null() ? slot.is_null() : same_kind(slot, value)) {
      slot = value;
    } else {
      throw ConfigError("config: '" + where + "' expects " + std::string(slot.type_name()) +
                        ", got " + value.type_name());
    }
  }
}

template <typename F>
auto field(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& err) {
    throw ConfigError(name + ": " + err.what());
  } catch (const json::exception& err) {
    throw ConfigError(name + ": " + err.what());
  }
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& name) {
  return field(name, [&] {
    if (!j.is_array()) throw ConfigError("expected an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols) {
        throw ConfigError("rows must be arrays of equal length");
      }
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
  });
}

std::vector<std::string> string_list(const json& j, const std::string& name) {
  return field(name, [&] { return j.get<std::vector<std::string>>(); });
}

json with_meta(const json& config) {
  return {{"version", version_string()}, {"seed", config["seed"]}, {"config", config}};
}

std::filesystem::path suffixed(const std::filesystem::path& path, const std::string& suffix) {
  std::filesystem::path out = path;
  out.replace_filename(path.stem().string() + suffix + path.extension().string());
  return out;
}

}  // namespace

void set_config_value(json& user, const std::string& pointer, const json& value) {
  field(pointer, [&] {
    user[json::json_pointer(pointer)] = value;
    return 0;
  });
}

json model_to_json(const ModelSpec& model) {
  json nonstat = json::array();
  for (const auto& l : model.nonstat_links) nonstat.push_back(l.to_string());
  json stat = json::array();
  for (const auto& l : model.stat_links) stat.push_back(l.to_string());
  return {{"nonstat_links", nonstat},
          {"stat_links", stat},
          {"d1", model.d1},
          {"d2", model.d2},
          {"share_theta1", model.share_theta1}};
}

ModelSpec model_from_config(const json& config) {
  const json& m = config.at("model");
  if (!m["example"].is_null()) {
    return field("model.example", [&] { return example_model(parse_example(m["example"].get<std::string>())); });
  }
  ModelSpec model;
  for (const auto& s : string_list(m["nonstat_links"], "model.nonstat_links")) {
    model.nonstat_links.push_back(field("model.nonstat_links", [&] { return LinkSpec::parse(s); }));
  }
  for (const auto& s : string_list(m["stat_links"], "model.stat_links")) {
    model.stat_links.push_back(field("model.stat_links", [&] { return LinkSpec::parse(s); }));
  }
  model.d1 = field("model.d1", [&] { return m["d1"].get<int>(); });
  model.d2 = field("model.d2", [&] { return m["d2"].get<int>(); });
  model.share_theta1 = m["share_theta1"].get<bool>();
  return model;
}

std::optional<ParamVector> truth_from_config(const json& config) {
  const json& m = config.at("model");
  const ModelSpec model = model_from_config(config);
  if (!m["truth"].is_null()) {
    return field("model.truth", [&] { return params_from_json(model, m["truth"]); });
  }
  if (!m["example"].is_null()) return example_truth(parse_example(m["example"].get<std::string>()));
  return std::nullopt;
}

LossSpec loss_from_config(const json& config) {
  return field("loss", [&] { return LossSpec::parse(config.at("loss").get<std::string>()); });
}

FitOptions fit_from_config(const json& config) {
  const json& f = config.at("fit");
  FitOptions opts;
  opts.loss = loss_from_config(config);
  opts.m_epsilon = field("fit.m_epsilon", [&] { return f["m_epsilon"].get<double>(); });
  opts.tol = field("fit.tol", [&] { return f["tol"].get<double>(); });
  opts.max_iter = field("fit.max_iter", [&] { return f["max_iter"].get<int>(); });
  if (!f["multistart"].is_null()) {
    opts.multistart = field("fit.multistart", [&] { return f["multistart"].get<int>(); });
  }
  opts.damping = field("fit.damping", [&] { return f["damping"].get<double>(); });
  opts.ridge = field("fit.ridge", [&] { return f["ridge"].get<double>(); });
  if (!f["initial"].is_null()) {
    const ModelSpec model = model_from_config(config);
    opts.initial = field("fit.initial", [&] { return params_from_json(model, f["initial"]); });
  }
  field("fit", [&] {
    opts.validate();
    return 0;
  });
  return opts;
}

DgpConfig dgp_from_config(const json& config) {
  const json& d = config.at("dgp");
  const ModelSpec model = model_from_config(config);
  const int n = field("dgp.n", [&] { return d["n"].get<int>(); });
  const ErrorLaw law =
      field("dgp.error_law", [&] { return parse_error_law(d["error_law"].get<std::string>()); });
  DgpConfig dgp = DgpConfig::reference_design(n, law);
  dgp.d1 = d["d1"].is_null() ? model.d1 : field("dgp.d1", [&] { return d["d1"].get<int>(); });
  dgp.d2 = d["d2"].is_null() ? model.d2 : field("dgp.d2", [&] { return d["d2"].get<int>(); });
  if (dgp.d1 != 2) {
    dgp.rho1 = Eigen::MatrixXd::Identity(dgp.d1, dgp.d1);
    dgp.sigma1 = Eigen::MatrixXd::Identity(dgp.d1, dgp.d1);
  }
  if (dgp.d2 != 2) {
    dgp.rho2 = 0.5 * Eigen::MatrixXd::Identity(dgp.d2, dgp.d2);
    dgp.sigma2 = Eigen::MatrixXd::Identity(dgp.d2, dgp.d2);
  }
  if (!d["rho1"].is_null()) dgp.rho1 = matrix_from_json(d["rho1"], "dgp.rho1");
  if (!d["sigma1"].is_null()) dgp.sigma1 = matrix_from_json(d["sigma1"], "dgp.sigma1");
  if (!d["rho2"].is_null()) dgp.rho2 = matrix_from_json(d["rho2"], "dgp.rho2");
  if (!d["sigma2"].is_null()) dgp.sigma2 = matrix_from_json(d["sigma2"], "dgp.sigma2");
  dgp.trend = field("dgp.trend", [&] { return parse_trend(d["trend"].get<std::string>()); });
  dgp.error_scale = field("dgp.error_scale", [&] { return d["error_scale"].get<double>(); });
  for (const auto& a : d["lin_proc_coeffs"]) {
    dgp.lin_proc_coeffs.push_back(matrix_from_json(a, "dgp.lin_proc_coeffs"));
  }
  if (!d["quantile_recentering"].is_null()) {
    dgp.quantile_recentering =
        field("dgp.quantile_recentering", [&] { return d["quantile_recentering"].get<double>(); });
  }
  return dgp;
}

json dgp_to_json(const DgpConfig& dgp) {
  json coeffs = json::array();
  for (const auto& a : dgp.lin_proc_coeffs) coeffs.push_back(matrix_to_json(a));
  json j = {{"n", dgp.n},
            {"d1", dgp.d1},
            {"d2", dgp.d2},
            {"rho1", matrix_to_json(dgp.rho1)},
            {"sigma1", matrix_to_json(dgp.sigma1)},
            {"rho2", matrix_to_json(dgp.rho2)},
            {"sigma2", matrix_to_json(dgp.sigma2)},
            {"trend", to_string(dgp.trend)},
            {"error_law", to_string(dgp.error_law)},
            {"error_scale", dgp.error_scale},
            {"lin_proc_coeffs", coeffs}};
  j["quantile_recentering"] =
      dgp.quantile_recentering ? json(*dgp.quantile_recentering) : json(nullptr);
  return j;
}

McConfig mc_from_config(const json& config) {
  const json& m = config.at("mc");
  McConfig mc;
  mc.example = field("mc.example", [&] { return parse_example(m["example"].get<std::string>()); });
  mc.n_list = field("mc.n_list", [&] { return m["n_list"].get<std::vector<int>>(); });
  mc.reps = field("mc.reps", [&] { return m["reps"].get<int>(); });
  mc.losses.clear();
  for (const auto& s : string_list(m["losses"], "mc.losses")) {
    mc.losses.push_back(field("mc.losses", [&] { return LossSpec::parse(s); }));
  }
  mc.laws.clear();
  for (const auto& s : string_list(m["laws"], "mc.laws")) {
    mc.laws.push_back(field("mc.laws", [&] { return parse_error_law(s); }));
  }
  mc.base_seed = field("seed", [&] { return config.at("seed").get<std::uint64_t>(); });
  mc.fit_options = fit_from_config(config);
  mc.threads = field("mc.threads", [&] { return m["threads"].get<int>(); });
  if (!m["error_scale"].is_null()) {
    mc.error_scale = field("mc.error_scale", [&] { return m["error_scale"].get<double>(); });
  }
  field("mc", [&] {
    mc.validate();
    return 0;
  });
  return mc;
}

std::vector<ForecastConfig> forecast_from_config(const json& config) {
  const json& f = config.at("forecast");
  ForecastConfig base;
  base.loss = loss_from_config(config);
  base.model = model_from_config(config);
  base.x_cols = string_list(f["x_cols"], "forecast.x_cols");
  base.z_cols = string_list(f["z_cols"], "forecast.z_cols");
  base.y_col = field("forecast.y_col", [&] { return f["y_col"].get<std::string>(); });
  base.date_col = field("forecast.date_col", [&] { return f["date_col"].get<std::string>(); });
  base.intercept = f["intercept"].get<bool>();
  base.quantile_levels =
      field("forecast.quantile_levels", [&] { return f["quantile_levels"].get<std::vector<double>>(); });
  base.fit_options = fit_from_config(config);
  base.threads = field("forecast.threads", [&] { return f["threads"].get<int>(); });
  const auto windows = field("forecast.window", [&] { return f["window"].get<std::vector<int>>(); });
  if (windows.empty()) throw ConfigError("forecast.window must list at least one window");
  std::vector<ForecastConfig> out;
  for (int w : windows) {
    ForecastConfig c = base;
    c.window = w;
    field("forecast", [&] {
      c.validate();
      return 0;
    });
    out.push_back(std::move(c));
  }
  return out;
}

json resolve_config(const json& user) {
  json config = default_config();
  overlay(config, user.is_null() ? json::object() : user, "");
  field("seed", [&] { return config["seed"].get<std::uint64_t>(); });

  const ModelSpec model = model_from_config(config);
  json& m = config["model"];
  const json example = m["example"];
  const json truth = m["truth"];
  m = model_to_json(model);
  m["example"] = example.is_null() ? json(nullptr)
                                   : json(to_string(parse_example(example.get<std::string>())));
  m["truth"] = truth;
  if (!truth.is_null()) {
    model.validate();
    m["truth"] = params_to_json(*truth_from_config(config));
  }

  config["loss"] = loss_from_config(config).to_string();
  config["dgp"] = dgp_to_json(dgp_from_config(config));

  json& mc = config["mc"];
  json losses = json::array();
  for (const auto& s : string_list(mc["losses"], "mc.losses")) {
    losses.push_back(field("mc.losses", [&] { return LossSpec::parse(s).to_string(); }));
  }
  mc["losses"] = losses;
  json laws = json::array();
  for (const auto& s : string_list(mc["laws"], "mc.laws")) {
    laws.push_back(field("mc.laws", [&] { return to_string(parse_error_law(s)); }));
  }
  mc["laws"] = laws;
  mc["example"] = field("mc.example", [&] { return to_string(parse_example(mc["example"].get<std::string>())); });
  string_list(mc["rate"], "mc.rate");
  fit_from_config(config);
  return config;
}

CommandResult cmd_simulate(const json& config, const std::filesystem::path& out) {
  const ModelSpec model = model_from_config(config);
  model.validate();
  const auto truth = truth_from_config(config);
  if (!truth) throw ConfigError("model.truth is required unless model.example is set");
  const DgpConfig dgp = dgp_from_config(config);
  if (dgp.d1 != model.d1 || dgp.d2 != model.d2) {
    throw ConfigError("dgp.d1/dgp.d2 must match model.d1/model.d2");
  }
  const auto seed = config.at("seed").get<std::uint64_t>();
  Simulation sim = simulate(dgp, model, *truth, seed);
  if (!config["model"]["example"].is_null()) sim.data.meta["example"] = config["model"]["example"];
  write_dataset(out, sim.data);
  json sidecar = with_meta(config);
  sidecar["meta"] = sim.data.meta;
  sidecar["truth"] = params_to_json(*truth);
  write_json(sidecar_path(out), sidecar);
  CommandResult r;
  r.summary = {{"rows", sim.data.n()}, {"out", out.string()}, {"meta", sim.data.meta}};
  return r;
}

CommandResult cmd_fit(const json& config, const std::filesystem::path& data_path,
                      const std::filesystem::path& out) {
  const ModelSpec model = model_from_config(config);
  model.validate();
  const FitOptions opts = fit_from_config(config);
  const Dataset data = read_dataset(data_path, model.d1, model.d2);
  const FitResult result = fit(model, data, opts);
  json j = fit_result_to_json(model, result);
  j["meta"] = with_meta(config);
  j["meta"]["data"] = data_path.string();
  j["meta"]["n"] = data.n();
  write_json(out, j);
  CommandResult r;
  r.status = result.converged ? 0 : 1;
  r.summary = {{"out", out.string()},
               {"converged", result.converged},
               {"iterations", result.iterations},
               {"objective", j["objective"]},
               {"param_values", j["param_values"]}};
  return r;
}

CommandResult cmd_mc(const json& config, const std::filesystem::path& out,
                     const std::optional<std::filesystem::path>& markdown,
                     const McProgress& progress) {
  const McConfig mc = mc_from_config(config);
  const int scale_power = config["mc"]["scale_power"].get<int>();
  const auto rate_params = string_list(config["mc"]["rate"], "mc.rate");
  const auto labels = example_model(mc.example).param_labels();
  for (const auto& p : rate_params) {
    if (std::find(labels.begin(), labels.end(), p) == labels.end()) {
      throw ConfigError("mc.rate: unknown parameter '" + p + "'");
    }
  }

  const McTable table = run_replications(mc, progress);
  write_text(out, summarize(table, SummaryFormat::kCsv, scale_power));

  json rates = json::array();
  std::string rate_csv = "param,loss,law,n_a,n_b,rate\n";
  std::string rate_md;
  for (const auto& p : rate_params) {
    for (const auto& loss : mc.losses) {
      for (ErrorLaw law : mc.laws) {
        for (std::size_t i = 1; i < mc.n_list.size(); ++i) {
          const int a = mc.n_list[i - 1];
          const int b = mc.n_list[i];
          json entry = {{"param", p}, {"loss", loss.to_string()}, {"law", to_string(law)},
                        {"n_a", a},   {"n_b", b}};
          std::string text;
          try {
            const double r = rate_exponent(table, p, loss, law, a, b);
            entry["rate"] = r;
            text = format_double(r);
          } catch (const UndefinedError&) {
            entry["rate"] = nullptr;
            text = "undefined";
          }
          rates.push_back(entry);
          rate_csv += p + "," + loss.to_string() + "," + to_string(law) + "," +
                      std::to_string(a) + "," + std::to_string(b) + "," + text + "\n";
          rate_md += "| " + p + " | " + loss.to_string() + " | " + to_string(law) + " | " +
                     std::to_string(a) + " | " + std::to_string(b) + " | " + text + " |\n";
        }
      }
    }
  }
  if (!rate_params.empty()) write_text(suffixed(out, "_rates"), rate_csv);
  if (markdown) {
    std::string md = summarize(table, SummaryFormat::kMarkdown, scale_power);
    if (!rate_params.empty()) {
      md += "\n| param | loss | law | n_a | n_b | rate |\n|---|---|---|---:|---:|---:|\n" + rate_md;
    }
    write_text(*markdown, md);
  }
  json flagged = json::array();
  for (const auto& row : table.rows) {
    if (row.flagged && row.param == labels.front()) {
      flagged.push_back({{"loss", row.loss.to_string()}, {"law", to_string(row.law)}, {"n", row.n},
                         {"failures", row.failures}});
    }
  }
  json sidecar = with_meta(config);
  sidecar["rates"] = rates;
  sidecar["flagged_cells"] = flagged;
  write_json(sidecar_path(out), sidecar);
  CommandResult r;
  r.summary = {{"rows", table.rows.size()}, {"rates", rates}, {"flagged_cells", flagged}};
  return r;
}

CommandResult cmd_forecast(const json& config, const std::filesystem::path& data_path,
                           const std::filesystem::path& out,
                           const std::optional<std::filesystem::path>& dump) {
  const auto configs = forecast_from_config(config);
  const CsvTable table = read_csv(data_path);
  ForecastReport all;
  for (const auto& c : configs) {
    ForecastReport part = run_forecast(table, c);
    for (auto& row : part.rows) all.rows.push_back(row);
    for (auto& s : part.series) all.series.push_back(std::move(s));
  }
  write_text(out, report_to_csv(all));
  if (dump) {
    if (all.series.size() == 1) {
      write_text(*dump, series_to_csv(all.series.front()));
    } else {
      for (const auto& s : all.series) {
        std::string tag = s.loss.to_string();
        std::replace(tag.begin(), tag.end(), ':', '-');
        std::replace(tag.begin(), tag.end(), '*', 'x');
        write_text(suffixed(*dump, "_w" + std::to_string(s.window) + "_" + tag), series_to_csv(s));
      }
    }
  }
  json rows = json::array();
  for (const auto& row : all.rows) {
    rows.push_back({{"window", row.window},
                    {"loss", row.loss.to_string()},
                    {"tau", row.tau ? json(*row.tau) : json(nullptr)},
                    {"pr2", row.pr2},
                    {"n_forecasts", row.n_forecasts},
                    {"fallback_count", row.fallback_count}});
  }
  json sidecar = with_meta(config);
  sidecar["data"] = data_path.string();
  sidecar["rows"] = rows;
  write_json(sidecar_path(out), sidecar);
  CommandResult r;
  r.summary = {{"rows", rows}};
  return r;
}

std::string loss_probe(const LossSpec& loss, const std::vector<double>& orders,
                       const ProbeGrid& grid, bool with_gap) {
  const bool se = loss.kind() == LossKind::kSquaredError;
  if (se && with_gap) {
    throw ConfigError("loss-probe: squared error has no gap bound; disable the gap columns");
  }
  if (orders.empty()) throw ConfigError("loss-probe: at least one mollifier order is required");
  if (!(grid.step > 0.0) || !(grid.u_max >= grid.u_min)) {
    throw ConfigError("loss-probe: grid needs step > 0 and u_max >= u_min");
  }
  const auto count = static_cast<long>(std::floor((grid.u_max - grid.u_min) / grid.step + 1e-9)) + 1;
  if (count > 10'000'000) throw ConfigError("loss-probe: grid has too many points");
  // Integer reciprocal steps give exactly rounded grid points.
  const double inv = 1.0 / grid.step;
  const bool integral = std::abs(inv - std::round(inv)) < 1e-9 * inv;
  const double first = std::round(grid.u_min * inv);
  const bool aligned = integral && std::abs(grid.u_min * inv - first) < 1e-9 * std::max(1.0, std::abs(first));
  const bool multi = orders.size() > 1;

  std::string out = multi ? "m," : "";
  out += "u,rho,rho_m,rho_m_prime,rho_m_second";
  if (with_gap) out += ",gap,gap_bound";
  out += '\n';
  for (double mv : orders) {
    const MollifierOrder m(mv);
    const double bound = with_gap ? gap_bound(loss, m) : 0.0;
    for (long i = 0; i < count; ++i) {
      const double u = aligned ? (first + static_cast<double>(i)) / std::round(inv)
                               : grid.u_min + static_cast<double>(i) * grid.step;
      const double rho = eval_loss(loss, u);
      double v0, v1, v2;
      if (se) {
        v0 = loss.scale() * (u * u + 1.0 / (2.0 * mv));
        v1 = loss.scale() * 2.0 * u;
        v2 = loss.scale() * 2.0;
      } else {
        v0 = mollified_eval(loss, m, u);
        v1 = mollified_grad(loss, m, u);
        v2 = mollified_hess(loss, m, u);
      }
      if (multi) out += format_double(mv) + ",";
      out += format_double(u) + "," + format_double(rho) + "," + format_double(v0) + "," +
             format_double(v1) + "," + format_double(v2);
      if (with_gap) out += "," + format_double(std::abs(v0 - rho)) + "," + format_double(bound);
      out += '\n';
    }
  }
  return out;
}

}  // namespace robustm
