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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "robustm/dgp.hpp"
#include "robustm/estimate.hpp"
#include "robustm/forecast.hpp"
#include "robustm/montecarlo.hpp"

// Run configuration and the commands behind the command-line tool.
//
// A run configuration is one JSON document with sections model, loss, dgp,
// fit, mc, forecast and seed. resolve_config() overlays a user document on
// the defaults, rejects unknown keys, expands example models and fills the
// design matrices, so the result can be fed back to reproduce a run.

namespace robustm {

nlohmann::json default_config();

/// Overlay `user` on the defaults. Throws ConfigError naming the first
/// unknown or mistyped key.
nlohmann::json resolve_config(const nlohmann::json& user);

/// Sets the value at a JSON pointer ("/dgp/n") in a user document, creating
/// intermediate objects.
void set_config_value(nlohmann::json& user, const std::string& pointer,
                      const nlohmann::json& value);

nlohmann::json model_to_json(const ModelSpec& model);
ModelSpec model_from_config(const nlohmann::json& config);
/// Truth of an example model or the model.truth entry; nullopt when neither.
std::optional<ParamVector> truth_from_config(const nlohmann::json& config);
LossSpec loss_from_config(const nlohmann::json& config);
FitOptions fit_from_config(const nlohmann::json& config);
DgpConfig dgp_from_config(const nlohmann::json& config);
nlohmann::json dgp_to_json(const DgpConfig& dgp);
McConfig mc_from_config(const nlohmann::json& config);
/// One configuration per entry of forecast.window.
std::vector<ForecastConfig> forecast_from_config(const nlohmann::json& config);

struct CommandResult {
  /// 0 ok, 1 non-convergence.
  int status = 0;
  nlohmann::json summary;
};

/// Dataset CSV plus a .json sidecar with metadata and the resolved config.
CommandResult cmd_simulate(const nlohmann::json& config, const std::filesystem::path& out);

/// Fits the dataset and writes the result JSON. Status 1 when not converged.
CommandResult cmd_fit(const nlohmann::json& config, const std::filesystem::path& data,
                      const std::filesystem::path& out);

/// Table CSV (and markdown when `markdown` is set) plus a .json sidecar.
/// Rate exponents requested in mc.rate go to the sidecar, the markdown and a
/// `<stem>_rates.csv` file.
CommandResult cmd_mc(const nlohmann::json& config, const std::filesystem::path& out,
                     const std::optional<std::filesystem::path>& markdown,
                     const McProgress& progress = {});

/// Report CSV (one row per window and loss) plus a .json sidecar, and the
/// per-t error dump when `dump` is set (suffixed per series when there is
/// more than one).
CommandResult cmd_forecast(const nlohmann::json& config, const std::filesystem::path& data,
                           const std::filesystem::path& out,
                           const std::optional<std::filesystem::path>& dump);

struct ProbeGrid {
  double u_min = -2.0;
  double u_max = 2.0;
  double step = 0.01;
};

/// CSV u,rho,rho_m,rho_m_prime,rho_m_second,gap,gap_bound (gap columns
/// dropped when `with_gap` is false). With several orders a leading m column
/// is added.
std::string loss_probe(const LossSpec& loss, const std::vector<double>& orders,
                       const ProbeGrid& grid, bool with_gap);

}  // namespace robustm
