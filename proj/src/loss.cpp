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

#include "robustm/loss.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "robustm/error.hpp"
#include "robustm/numeric.hpp"

namespace robustm {

namespace {

double parse_param(std::string_view text, std::string_view family) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("loss: cannot parse parameter '" + std::string(text) +
                      "' for " + std::string(family));
  }
  return value;
}

// Truncated moments of X = u + s Z, Z ~ N(0,1), used by the Huber closed form.
struct HuberMoments {
  double p_lo;   // P(X < -c)
  double p_mid;  // P(-c <= X <= c)
  double p_hi;   // P(X > c)
  double phi_lo;
  double phi_hi;
  double alpha;
  double beta;
};

HuberMoments huber_moments(double c, double s, double u) {
  HuberMoments h{};
  h.alpha = (-c - u) / s;
  h.beta = (c - u) / s;
  h.p_lo = normal_cdf(h.alpha);
  h.p_hi = normal_cdf(-h.beta);
  h.p_mid = normal_interval(h.alpha, h.beta);
  h.phi_lo = normal_pdf(h.alpha);
  h.phi_hi = normal_pdf(h.beta);
  return h;
}

double lad_eval(double m, double u) {
  const double s = 1.0 / std::sqrt(2.0 * m);
  return u * std::erf(u * std::sqrt(m)) + 2.0 * s * normal_pdf(u / s);
}

double lad_grad(double m, double u) { return std::erf(u * std::sqrt(m)); }

double lad_hess(double m, double u) {
  return 2.0 * std::sqrt(m / std::numbers::pi) * gauss_factor(m * u * u);
}

double huber_eval(double c, double m, double u) {
  const double s = 1.0 / std::sqrt(2.0 * m);
  const HuberMoments h = huber_moments(c, s, u);
  const double second_mid = (u * u + s * s) * h.p_mid +
                            s * (u - c) * h.phi_lo - s * (u + c) * h.phi_hi;
  const double first_hi = u * h.p_hi + s * h.phi_hi;
  const double first_lo = u * h.p_lo - s * h.phi_lo;
  return 0.5 * second_mid + c * (first_hi - first_lo) -
         0.5 * c * c * (h.p_hi + h.p_lo);
}

double huber_grad(double c, double m, double u) {
  const double s = 1.0 / std::sqrt(2.0 * m);
  const HuberMoments h = huber_moments(c, s, u);
  const double first_mid = u * h.p_mid + s * (h.phi_lo - h.phi_hi);
  return first_mid + c * (h.p_hi - h.p_lo);
}

double huber_hess(double c, double m, double u) {
  const double s = 1.0 / std::sqrt(2.0 * m);
  return normal_interval((-c - u) / s, (c - u) / s);
}

void require_mollifiable(const LossSpec& spec) {
  if (spec.kind() == LossKind::kSquaredError) {
    throw UnsupportedError(
        "mollified loss: squared error is smooth; use eval_loss instead");
  }
}

}  // namespace

LossSpec::LossSpec(LossKind kind, double param) : kind_(kind), param_(param) {
  switch (kind_) {
    case LossKind::kQuantile:
      if (!(param_ > 0.0 && param_ < 1.0)) {
        throw ConfigError("loss: quantile level tau must lie in (0,1)");
      }
      break;
    case LossKind::kHuber:
      if (!(param_ > 0.0) || !std::isfinite(param_)) {
        throw ConfigError("loss: Huber threshold c must be positive");
      }
      break;
    case LossKind::kLad:
    case LossKind::kSquaredError:
      param_ = 0.0;
      break;
  }
}

LossSpec LossSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view tail =
      colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  // Table shorthands.
  if (head == "l1" && tail.empty()) return huber(1.25);
  if (head == "l2" && tail.empty()) return lad();
  if (head == "l3" && tail.empty()) return quantile(0.3);
  if (head == "lad" || head == "ae") return lad();
  if (head == "se" || head == "squared") return squared_error();
  if (head == "quantile" || head == "check" || head == "ql") {
    if (tail.empty()) throw ConfigError("loss: quantile needs a level, e.g. quantile:0.3");
    return quantile(parse_param(tail, head));
  }
  if (head == "huber" || head == "hl") {
    if (tail.empty()) throw ConfigError("loss: huber needs a threshold, e.g. huber:1.25");
    return huber(parse_param(tail, head));
  }
  throw ConfigError("loss: unknown loss '" + std::string(text) + "'");
}

double LossSpec::lipschitz() const {
  switch (kind_) {
    case LossKind::kLad:
      return scale_;
    case LossKind::kQuantile:
      return scale_ * std::max(param_, 1.0 - param_);
    case LossKind::kHuber:
      return scale_ * param_;
    case LossKind::kSquaredError:
      break;
  }
  throw UnsupportedError("loss: squared error has no global Lipschitz constant");
}

std::string LossSpec::to_string() const {
  auto num = [](double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
  };
  std::string out;
  switch (kind_) {
    case LossKind::kLad:
      out = "lad";
      break;
    case LossKind::kQuantile:
      out = "quantile:" + num(param_);
      break;
    case LossKind::kHuber:
      out = "huber:" + num(param_);
      break;
    case LossKind::kSquaredError:
      out = "se";
      break;
  }
  if (scale_ != 1.0) out += "*" + num(scale_);
  return out;
}

LossSpec LossSpec::scaled(double factor) const {
  if (!(factor > 0.0)) throw ConfigError("loss: scale factor must be positive");
  LossSpec copy = *this;
  copy.scale_ *= factor;
  return copy;
}

MollifierOrder::MollifierOrder(double m) : m_(m) {
  if (!(m >= 1.0) || !std::isfinite(m)) {
    throw ConfigError("mollifier order m must be a finite number >= 1");
  }
}

MollifierOrder MollifierOrder::from_sample_size(std::int64_t n, double eps) {
  if (n < 1) throw ConfigError("mollifier order: sample size must be positive");
  if (!(eps > 0.0)) throw ConfigError("mollifier order: epsilon must be positive");
  return MollifierOrder(
      std::max(1.0, std::floor(std::pow(static_cast<double>(n), 2.0 + eps))));
}

double eval_loss(const LossSpec& spec, double u) {
  double value = 0.0;
  switch (spec.kind()) {
    case LossKind::kLad:
      value = std::abs(u);
      break;
    case LossKind::kQuantile:
      value = u * (spec.param() - (u < 0.0 ? 1.0 : 0.0));
      break;
    case LossKind::kHuber: {
      const double c = spec.param();
      const double a = std::abs(u);
      value = a <= c ? 0.5 * u * u : c * (a - 0.5 * c);
      break;
    }
    case LossKind::kSquaredError:
      value = u * u;
      break;
  }
  return spec.scale() * value;
}

double subgrad(const LossSpec& spec, double u) {
  double value = 0.0;
  switch (spec.kind()) {
    case LossKind::kLad:
      value = u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
      break;
    case LossKind::kQuantile: {
      const double tau = spec.param();
      value = u > 0.0 ? tau : (u < 0.0 ? tau - 1.0 : tau - 0.5);
      break;
    }
    case LossKind::kHuber:
      value = std::clamp(u, -spec.param(), spec.param());
      break;
    case LossKind::kSquaredError:
      value = 2.0 * u;
      break;
  }
  return spec.scale() * value;
}

double mollified_eval(const LossSpec& spec, MollifierOrder m, double u) {
  require_mollifiable(spec);
  const double mv = m.value();
  double value = 0.0;
  switch (spec.kind()) {
    case LossKind::kLad:
      value = lad_eval(mv, u);
      break;
    case LossKind::kQuantile:
      // rho_tau(u) = (tau - 1/2) u + |u|/2 and the Gaussian kernel is even.
      value = (spec.param() - 0.5) * u + 0.5 * lad_eval(mv, u);
      break;
    case LossKind::kHuber:
      value = huber_eval(spec.param(), mv, u);
      break;
    case LossKind::kSquaredError:
      break;
  }
  return spec.scale() * value;
}

double mollified_grad(const LossSpec& spec, MollifierOrder m, double u) {
  require_mollifiable(spec);
  const double mv = m.value();
  double value = 0.0;
  switch (spec.kind()) {
    case LossKind::kLad:
      value = lad_grad(mv, u);
      break;
    case LossKind::kQuantile:
      value = (spec.param() - 0.5) + 0.5 * lad_grad(mv, u);
      break;
    case LossKind::kHuber:
      value = huber_grad(spec.param(), mv, u);
      break;
    case LossKind::kSquaredError:
      break;
  }
  return spec.scale() * value;
}

double mollified_hess(const LossSpec& spec, MollifierOrder m, double u) {
  require_mollifiable(spec);
  const double mv = m.value();
  double value = 0.0;
  switch (spec.kind()) {
    case LossKind::kLad:
      value = lad_hess(mv, u);
      break;
    case LossKind::kQuantile:
      value = 0.5 * lad_hess(mv, u);
      break;
    case LossKind::kHuber:
      value = huber_hess(spec.param(), mv, u);
      break;
    case LossKind::kSquaredError:
      break;
  }
  return spec.scale() * value;
}

double mollified(const LossSpec& spec, MollifierOrder m, double u, int order) {
  switch (order) {
    case 0:
      return mollified_eval(spec, m, u);
    case 1:
      return mollified_grad(spec, m, u);
    case 2:
      return mollified_hess(spec, m, u);
    default:
      throw ConfigError("mollified: derivative order must be 0, 1 or 2");
  }
}

double gap_bound(const LossSpec& spec, MollifierOrder m) {
  return spec.lipschitz() / std::sqrt(std::numbers::pi * m.value());
}

}  // namespace robustm
