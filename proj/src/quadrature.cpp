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

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "robustm/error.hpp"
#include "robustm/loss.hpp"
#include "robustm/numeric.hpp"

namespace robustm {

namespace {

// Beyond |y| = 10 the Hermite weight is below e^{-100}.
constexpr double kWindow = 10.0;

double hermite(int order, double y) {
  switch (order) {
    case 0:
      return 1.0;
    case 1:
      return 2.0 * y;
    default:
      return 4.0 * y * y - 2.0;
  }
}

std::vector<double> kinks(const LossSpec& spec) {
  switch (spec.kind()) {
    case LossKind::kLad:
    case LossKind::kQuantile:
      return {0.0};
    case LossKind::kHuber:
      return {-spec.param(), spec.param()};
    case LossKind::kSquaredError:
      break;
  }
  return {};
}

const QuadratureRule& cached_rule(int nodes, bool hermite_rule) {
  static std::mutex mutex;
  static std::map<std::pair<int, bool>, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(nodes, hermite_rule);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, hermite_rule ? gauss_hermite(nodes) : gauss_legendre(nodes)).first;
  }
  return it->second;
}

}  // namespace

QuadratureResult quadrature_oracle(const LossSpec& spec, MollifierOrder m,
                                   double u, int order, int nodes) {
  if (order < 0 || order > 2) throw ConfigError("quadrature_oracle: order must be 0, 1 or 2");
  if (nodes < 32) throw ConfigError("quadrature_oracle: nodes must be >= 32");

  const double root_m = std::sqrt(m.value());
  // Subtracting rho(u) leaves every order >= 1 integral unchanged (the Hermite
  // polynomials integrate to zero) and removes the large constant that would
  // otherwise cancel.
  const double shift = order >= 1 ? eval_loss(spec, u) : 0.0;
  auto integrand = [&](double y) {
    return (eval_loss(spec, u + y / root_m) - shift) * hermite(order, y);
  };

  std::vector<double> breaks;
  for (double k : kinks(spec)) {
    const double y = root_m * (k - u);
    if (std::abs(y) < kWindow) breaks.push_back(y);
  }

  QuadratureResult result;
  double integral = 0.0;
  if (breaks.empty()) {
    const QuadratureRule& rule = cached_rule(nodes, true);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      integral += rule.weights[i] * integrand(rule.nodes[i]);
    }
  } else {
    std::sort(breaks.begin(), breaks.end());
    breaks.insert(breaks.begin(), -kWindow);
    breaks.push_back(kWindow);
    const QuadratureRule& rule = cached_rule(nodes, false);
    double longest = 0.0;
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
      const double a = breaks[p];
      const double b = breaks[p + 1];
      longest = std::max(longest, b - a);
      const double half = 0.5 * (b - a);
      const double mid = 0.5 * (a + b);
      double piece = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double y = mid + half * rule.nodes[i];
        piece += rule.weights[i] * integrand(y) * std::exp(-y * y);
      }
      integral += half * piece;
    }
    // Empirical resolution limit of Gauss-Legendre on a Gaussian-weighted
    // quadratic piece of length L: about 2L + 12 nodes for 1e-13.
    result.accuracy_warning = nodes < static_cast<int>(std::ceil(2.0 * longest + 12.0));
  }
  result.value = std::pow(root_m, order) * integral * std::numbers::inv_sqrtpi;
  return result;
}

}  // namespace robustm
