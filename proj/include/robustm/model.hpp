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
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace robustm {

enum class LinkKind { kIdentity, kPower, kGaussPdf, kHermiteExp, kHermiteExpLinear };

/// A link function of the additive single-index model together with its
/// exact first and second derivatives.
class LinkSpec {
 public:
  static LinkSpec identity() { return LinkSpec(LinkKind::kIdentity, 1); }
  static LinkSpec power(int k);
  static LinkSpec gauss_pdf() { return LinkSpec(LinkKind::kGaussPdf, 0); }
  static LinkSpec hermite_exp() { return LinkSpec(LinkKind::kHermiteExp, 0); }
  static LinkSpec hermite_exp_linear() { return LinkSpec(LinkKind::kHermiteExpLinear, 0); }

  /// "identity", "power:<k>", "gausspdf", "hermite_exp", "hermite_exp_linear".
  static LinkSpec parse(std::string_view text);
  std::string to_string() const;

  LinkKind kind() const { return kind_; }
  int power_order() const { return k_; }

  double value(double u) const;
  double first(double u) const;
  double second(double u) const;

  /// +1 for even links, -1 for odd ones, 0 when neither.
  int parity() const;

  bool operator==(const LinkSpec&) const = default;

 private:
  LinkSpec(LinkKind kind, int k) : kind_(kind), k_(k) {}
  LinkKind kind_;
  int k_;
};

/// Regularity class of a link. H-regular links are homogeneous,
/// g(lambda u) = nu(lambda) g(u) with nu(lambda) = lambda^order; I-regular
/// links are absolutely integrable.
struct Regularity {
  bool h_regular = false;
  int order = 0;

  double nu(double lambda) const;
  double nu_dot(double lambda) const;
  std::string describe() const;
};

Regularity classify_link(const LinkSpec& link);

struct ModelSpec {
  std::vector<LinkSpec> nonstat_links;
  std::vector<LinkSpec> stat_links;
  int d1 = 0;
  int d2 = 0;
  bool share_theta1 = false;

  int p1() const { return static_cast<int>(nonstat_links.size()); }
  int p2() const { return static_cast<int>(stat_links.size()); }
  int theta1_blocks() const { return share_theta1 ? (p1() > 0 ? 1 : 0) : p1(); }
  /// theta1 block used by nonstationary link j.
  int theta1_block_of(int j) const { return share_theta1 ? 0 : j; }

  /// Number of columns of the parameter Jacobian, ordered
  /// (theta1 blocks, gamma1, theta2 blocks, gamma2).
  int param_count() const;
  int stat_param_offset() const { return theta1_blocks() * d1 + p1(); }

  bool all_identity() const;

  /// Throws ConfigError when the structure is invalid.
  void validate() const;

  /// Display labels following the table convention: links are numbered
  /// 1..p1+p2 in order, gamma<j> for coefficients and theta<j><k> for index
  /// coordinates. A shared theta1 is labelled with the first link.
  std::vector<std::string> param_labels() const;
};

struct ParamVector {
  std::vector<Eigen::VectorXd> theta1;
  Eigen::VectorXd gamma1;
  std::vector<Eigen::VectorXd> theta2;
  Eigen::VectorXd gamma2;

  /// Flat layout matching ModelSpec::param_count().
  Eigen::VectorXd flatten() const;
  static ParamVector unflatten(const ModelSpec& model, const Eigen::VectorXd& flat);
  void check_shape(const ModelSpec& model) const;
};

struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  Eigen::MatrixXd Z;
  /// Free-form provenance: seed, generator id, column names, ...
  nlohmann::json meta = nlohmann::json::object();

  int n() const { return static_cast<int>(y.size()); }
  /// Shape and finiteness checks against a model.
  void validate(const ModelSpec& model) const;
};

double regression_mean(const ModelSpec& model, const ParamVector& params,
                       const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& z);

/// Conditional means for every row of the dataset.
Eigen::VectorXd fitted_values(const ModelSpec& model, const ParamVector& params,
                              const Dataset& data);

Eigen::VectorXd residuals(const ModelSpec& model, const ParamVector& params,
                          const Dataset& data);

/// n x P matrix of d mean_t / d params, columns ordered as in
/// ModelSpec::param_count(). A shared theta1 accumulates the contributions of
/// every nonstationary link.
Eigen::MatrixXd param_jacobian(const ModelSpec& model, const ParamVector& params,
                               const Dataset& data);

/// Rescales each index vector to unit norm with a positive leading nonzero
/// coordinate. Identity links absorb the scale and sign into gamma; other
/// links keep gamma as is. Throws DegenerateError on a zero vector.
ParamVector normalize(const ModelSpec& model, const ParamVector& params);

}  // namespace robustm
