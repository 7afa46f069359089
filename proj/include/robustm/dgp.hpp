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

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "robustm/model.hpp"
#include "robustm/rng.hpp"

namespace robustm {

enum class ErrorLaw { kNormal, kMixedNormal, kT2, kCauchy };

/// Accepts "normal"/"d1", "mixed_normal"/"d2", "t2"/"d3", "cauchy"/"t1"/"d4".
ErrorLaw parse_error_law(std::string_view text);
std::string to_string(ErrorLaw law);
/// Short table tag d1..d4.
std::string law_tag(ErrorLaw law);

/// tau-quantile of the unscaled law.
double law_quantile(ErrorLaw law, double tau);

enum class Trend { kNone, kLinear };

Trend parse_trend(std::string_view text);
std::string to_string(Trend trend);

struct DgpConfig {
  int n = 100;
  int d1 = 2;
  int d2 = 2;
  Eigen::MatrixXd rho1;
  Eigen::MatrixXd sigma1;
  Eigen::MatrixXd rho2;
  Eigen::MatrixXd sigma2;
  Trend trend = Trend::kLinear;
  ErrorLaw error_law = ErrorLaw::kNormal;
  double error_scale = 0.5;
  /// A_0, A_1, ..., A_J of the innovation filter; empty means [I].
  std::vector<Eigen::MatrixXd> lin_proc_coeffs;
  std::optional<double> quantile_recentering;

  /// Unit-root regressors with sigma1 = diag(0.2, 0.5) and a linearly
  /// trending VAR(1) with rho2 = 0.5 I, sigma2 = I; errors scaled by 0.5.
  static DgpConfig reference_design(int n, ErrorLaw law);

  /// Throws ConfigError or ShapeError naming the offending field.
  void validate() const;
  /// False when rho1 differs from the identity (still usable, but the
  /// regressors are then not integrated).
  bool unit_root_conformant() const;
};

/// w_t = sum_j A_j eta_{t-j} with i.i.d. N(0, I) eta. The n main draws are
/// taken first and the J presample draws after them, so appending zero taps
/// leaves the output unchanged.
Eigen::MatrixXd gen_linear_process(const std::vector<Eigen::MatrixXd>& coeffs, int n, Rng& rng);

/// x_t = rho1 x_{t-1} + sigma1 w_t, x_0 = 0, rows t = 1..n.
Eigen::MatrixXd gen_unit_root(const DgpConfig& config, Rng& rng);

/// z_t = h(t/n) + v_t with v a VAR(1) started 200 steps before t = 1.
Eigen::MatrixXd gen_trending_stationary(const DgpConfig& config, Rng& rng);

/// i.i.d. draws times `scale`. With `recentering` set, the law's tau-quantile
/// is subtracted before scaling.
Eigen::VectorXd gen_errors(ErrorLaw law, int n, double scale, std::optional<double> recentering,
                           Rng& rng);

struct Simulation {
  Dataset data;
  ModelSpec model;
  ParamVector truth;
  Eigen::VectorXd errors;
};

/// Regressors, errors and responses from independent substreams of `seed`.
Simulation simulate(const DgpConfig& config, const ModelSpec& model, const ParamVector& truth,
                    std::uint64_t seed);

enum class ExampleId { kEx51, kEx52 };

ExampleId parse_example(std::string_view text);
std::string to_string(ExampleId id);

ModelSpec example_model(ExampleId id);
ParamVector example_truth(ExampleId id);

Simulation gen_example(ExampleId id, int n, ErrorLaw law, std::uint64_t seed,
                       std::optional<double> recentering = std::nullopt);

/// Sample kurtosis (not excess) of a vector.
double sample_kurtosis(const Eigen::VectorXd& v);

}  // namespace robustm
