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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "robustm/loss.hpp"
#include "robustm/model.hpp"

namespace robustm {

struct FitOptions {
  LossSpec loss = LossSpec::lad();
  double m_epsilon = 0.1;
  double tol = 1e-8;
  /// Newton iterations allowed per smoothing level.
  int max_iter = 200;
  /// Unset: 8 starts for models with a nonlinear link, 1 otherwise.
  std::optional<int> multistart;
  double damping = 0.5;
  double ridge = 1e-10;
  /// Starting point for start 0 instead of the least-squares warm start.
  std::optional<ParamVector> initial;

  void validate() const;
  int starts_for(const ModelSpec& model) const;
};

struct FitResult {
  ParamVector params;
  /// L_n at the optimum minus L_n at the winning start's initial point.
  double objective = 0.0;
  double loss_value = 0.0;
  double a1_hat = 0.0;
  double a2_hat = 0.0;
  Eigen::MatrixXd sigma_hat;
  Eigen::MatrixXd stat_cov;
  int iterations = 0;
  bool converged = false;
  Eigen::VectorXd residuals;
  int start_index = 0;
  /// Exact L_n after every accepted step of the winning start, starting
  /// with its initial value.
  std::vector<double> loss_trace;
};

/// Cholesky factor of a symmetric matrix. Throws RankError naming the first
/// column whose pivot falls below 64 eps times the largest diagonal entry.
Eigen::MatrixXd checked_cholesky(const Eigen::MatrixXd& a,
                                 const std::vector<std::string>& labels = {});

/// ((a2/n) J'J + ridge I)^{-1} (1/sqrt(n)) J' psi.
Eigen::VectorXd quadratic_minimizer(const Eigen::MatrixXd& J, const Eigen::VectorXd& psi_e,
                                    double a2, double ridge,
                                    const std::vector<std::string>& labels = {});

/// Exact objective sum_t rho(e_t).
double objective_value(const LossSpec& loss, const Eigen::VectorXd& residuals);

FitResult fit(const ModelSpec& model, const Dataset& data, const FitOptions& opts);

/// Mean of squared subgradients.
double estimate_a1(const Eigen::VectorXd& residuals, const LossSpec& loss);

/// Mean of mollified second derivatives (2 times the scale for squared error).
double estimate_a2(const Eigen::VectorXd& residuals, const LossSpec& loss, MollifierOrder m);

/// (1/n) sum_t s_t s_t' over the stationary block s_t of the parameter
/// Jacobian, of dimension p2 (d2 + 1).
Eigen::MatrixXd estimate_sigma(const ModelSpec& model, const ParamVector& params,
                               const Dataset& data);

/// (a1 / a2^2) sigma^{-1} / n.
Eigen::MatrixXd stationary_covariance(double a1, double a2, const Eigen::MatrixXd& sigma_hat,
                                      int n);

nlohmann::json params_to_json(const ParamVector& params);
ParamVector params_from_json(const ModelSpec& model, const nlohmann::json& j);
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
nlohmann::json fit_result_to_json(const ModelSpec& model, const FitResult& result);
nlohmann::json fit_options_to_json(const FitOptions& opts);

}  // namespace robustm
