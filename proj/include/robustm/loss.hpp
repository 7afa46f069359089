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
#include <string>
#include <string_view>

namespace robustm {

enum class LossKind { kLad, kQuantile, kHuber, kSquaredError };

/// A member of the convex loss catalog. Immutable once constructed; the
/// constructor validates the family parameter.
class LossSpec {
 public:
  LossSpec(LossKind kind, double param);

  static LossSpec lad() { return {LossKind::kLad, 0.0}; }
  static LossSpec quantile(double tau) { return {LossKind::kQuantile, tau}; }
  static LossSpec huber(double c) { return {LossKind::kHuber, c}; }
  static LossSpec squared_error() { return {LossKind::kSquaredError, 0.0}; }

  /// Parses "lad", "quantile:<tau>", "huber:<c>" or "se". Aliases "ae",
  /// "check:<tau>" and "squared" are accepted, as are the table shorthands
  /// l1 (huber:1.25), l2 (lad) and l3 (quantile:0.3).
  static LossSpec parse(std::string_view text);

  LossKind kind() const { return kind_; }
  double param() const { return param_; }
  /// Global Lipschitz constant of the loss. Throws UnsupportedError for
  /// squared error, which has none.
  double lipschitz() const;
  bool has_lipschitz() const { return kind_ != LossKind::kSquaredError; }

  /// Canonical textual form, inverse of parse().
  std::string to_string() const;

  /// Scaled copy of the loss, rho -> factor * rho. Only used to exercise
  /// argmin invariance; the scale is carried separately from the family.
  LossSpec scaled(double factor) const;
  double scale() const { return scale_; }
  /// The same family at scale 1.
  LossSpec unit() const {
    LossSpec copy = *this;
    copy.scale_ = 1.0;
    return copy;
  }

  bool operator==(const LossSpec& other) const = default;

 private:
  LossKind kind_;
  double param_;
  double scale_ = 1.0;
};

/// Index m of the Gaussian regular sequence phi_m(x) = sqrt(m/pi) exp(-m x^2).
class MollifierOrder {
 public:
  explicit MollifierOrder(double m);
  /// m = floor(n^(2 + eps)).
  static MollifierOrder from_sample_size(std::int64_t n, double eps = 0.1);
  double value() const { return m_; }

 private:
  double m_;
};

double eval_loss(const LossSpec& spec, double u);

/// Monotone subgradient selection: 0 at the LAD kink, tau - 1/2 at the
/// quantile kink, +-c at the Huber joints.
double subgrad(const LossSpec& spec, double u);

/// Gaussian-mollified loss rho_m(u) and its first two derivatives, in
/// closed form. Squared error is rejected with UnsupportedError.
double mollified_eval(const LossSpec& spec, MollifierOrder m, double u);
double mollified_grad(const LossSpec& spec, MollifierOrder m, double u);
double mollified_hess(const LossSpec& spec, MollifierOrder m, double u);

/// Derivative of the given order (0, 1 or 2) of rho_m.
double mollified(const LossSpec& spec, MollifierOrder m, double u, int order);

/// sup_u |rho_m(u) - rho(u)| <= lipschitz / sqrt(pi m).
double gap_bound(const LossSpec& spec, MollifierOrder m);

struct QuadratureResult {
  double value = 0.0;
  /// Set when the node count is too small to resolve the longest smooth
  /// piece of the integrand.
  bool accuracy_warning = false;
};

/// Independent evaluation of d^order/du^order rho_m(u) through the substituted
/// integral m^(order/2) / sqrt(pi) * int rho(u + y/sqrt(m)) H_order(y) e^{-y^2} dy.
///
/// When a kink of rho lands inside |y| < 10 the Hermite-weighted integrand is
/// split there and each smooth piece is integrated with `nodes`-point
/// Gauss-Legendre; otherwise a `nodes`-point Gauss-Hermite rule is used.
/// Requires nodes >= 32. Works for every loss kind, squared error included.
QuadratureResult quadrature_oracle(const LossSpec& spec, MollifierOrder m,
                                   double u, int order, int nodes);

}  // namespace robustm
