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

#include "robustm/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "robustm/error.hpp"
#include "robustm/numeric.hpp"

namespace robustm {

LinkSpec LinkSpec::power(int k) {
  if (k < 2) throw ConfigError("link: power order must be >= 2");
  return LinkSpec(LinkKind::kPower, k);
}

LinkSpec LinkSpec::parse(std::string_view text) {
  if (text == "identity" || text == "linear") return identity();
  if (text == "gausspdf" || text == "gauss_pdf" || text == "phi") return gauss_pdf();
  if (text == "hermite_exp") return hermite_exp();
  if (text == "hermite_exp_linear") return hermite_exp_linear();
  if (text.starts_with("power:")) {
    int k = 0;
    const auto digits = text.substr(6);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) {
      throw ConfigError("link: bad power order in '" + std::string(text) + "'");
    }
    return power(k);
  }
  throw ConfigError("link: unknown link '" + std::string(text) + "'");
}

std::string LinkSpec::to_string() const {
  switch (kind_) {
    case LinkKind::kIdentity:
      return "identity";
    case LinkKind::kPower:
      return "power:" + std::to_string(k_);
    case LinkKind::kGaussPdf:
      return "gausspdf";
    case LinkKind::kHermiteExp:
      return "hermite_exp";
    case LinkKind::kHermiteExpLinear:
      return "hermite_exp_linear";
  }
  return "identity";
}

double LinkSpec::value(double u) const {
  switch (kind_) {
    case LinkKind::kIdentity:
      return u;
    case LinkKind::kPower:
      return std::pow(u, k_);
    case LinkKind::kGaussPdf:
      return normal_pdf(u);
    case LinkKind::kHermiteExp:
      return gauss_factor(u * u);
    case LinkKind::kHermiteExpLinear:
      return u * gauss_factor(u * u);
  }
  return 0.0;
}

double LinkSpec::first(double u) const {
  switch (kind_) {
    case LinkKind::kIdentity:
      return 1.0;
    case LinkKind::kPower:
      return k_ * std::pow(u, k_ - 1);
    case LinkKind::kGaussPdf:
      return -u * normal_pdf(u);
    case LinkKind::kHermiteExp:
      return -2.0 * u * gauss_factor(u * u);
    case LinkKind::kHermiteExpLinear:
      return (1.0 - 2.0 * u * u) * gauss_factor(u * u);
  }
  return 0.0;
}

double LinkSpec::second(double u) const {
  switch (kind_) {
    case LinkKind::kIdentity:
      return 0.0;
    case LinkKind::kPower:
      return k_ * (k_ - 1) * std::pow(u, k_ - 2);
    case LinkKind::kGaussPdf:
      return (u * u - 1.0) * normal_pdf(u);
    case LinkKind::kHermiteExp:
      return (4.0 * u * u - 2.0) * gauss_factor(u * u);
    case LinkKind::kHermiteExpLinear:
      return (4.0 * u * u * u - 6.0 * u) * gauss_factor(u * u);
  }
  return 0.0;
}

int LinkSpec::parity() const {
  switch (kind_) {
    case LinkKind::kIdentity:
    case LinkKind::kHermiteExpLinear:
      return -1;
    case LinkKind::kPower:
      return k_ % 2 == 0 ? 1 : -1;
    case LinkKind::kGaussPdf:
    case LinkKind::kHermiteExp:
      return 1;
  }
  return 0;
}

double Regularity::nu(double lambda) const { return std::pow(lambda, order); }

double Regularity::nu_dot(double lambda) const {
  return order * std::pow(lambda, order - 1);
}

std::string Regularity::describe() const {
  if (!h_regular) return "I-regular";
  if (order == 1) return "H-regular, nu(lambda)=lambda";
  return "H-regular, nu(lambda)=lambda^" + std::to_string(order);
}

Regularity classify_link(const LinkSpec& link) {
  switch (link.kind()) {
    case LinkKind::kIdentity:
      return {true, 1};
    case LinkKind::kPower:
      return {true, link.power_order()};
    case LinkKind::kGaussPdf:
    case LinkKind::kHermiteExp:
    case LinkKind::kHermiteExpLinear:
      return {false, 0};
  }
  return {};
}

int ModelSpec::param_count() const {
  return theta1_blocks() * d1 + p1() + p2() * d2 + p2();
}

bool ModelSpec::all_identity() const {
  auto is_id = [](const LinkSpec& l) { return l.kind() == LinkKind::kIdentity; };
  return std::all_of(nonstat_links.begin(), nonstat_links.end(), is_id) &&
         std::all_of(stat_links.begin(), stat_links.end(), is_id);
}

void ModelSpec::validate() const {
  if (p1() + p2() < 1) throw ConfigError("model: needs at least one link (p1 + p2 >= 1)");
  if (p1() > 0 && d1 < 1) throw ConfigError("model: d1 must be >= 1 when nonstat_links is nonempty");
  if (p2() > 0 && d2 < 1) throw ConfigError("model: d2 must be >= 1 when stat_links is nonempty");
  if (d1 < 0 || d2 < 0) throw ConfigError("model: dimensions must be nonnegative");
  for (const auto& link : nonstat_links) {
    if (!classify_link(link).h_regular && !share_theta1) {
      throw ConfigError(
          "model: I-regular nonstationary links require share_theta1 = true");
    }
  }
}

std::vector<std::string> ModelSpec::param_labels() const {
  std::vector<std::string> labels(static_cast<std::size_t>(param_count()));
  int col = 0;
  for (int b = 0; b < theta1_blocks(); ++b) {
    for (int k = 0; k < d1; ++k) labels[col++] = "theta" + std::to_string(b + 1) + std::to_string(k + 1);
  }
  for (int j = 0; j < p1(); ++j) labels[col++] = "gamma" + std::to_string(j + 1);
  for (int j = 0; j < p2(); ++j) {
    for (int k = 0; k < d2; ++k) {
      labels[col++] = "theta" + std::to_string(p1() + j + 1) + std::to_string(k + 1);
    }
  }
  for (int j = 0; j < p2(); ++j) labels[col++] = "gamma" + std::to_string(p1() + j + 1);
  return labels;
}

Eigen::VectorXd ParamVector::flatten() const {
  Eigen::Index size = gamma1.size() + gamma2.size();
  for (const auto& t : theta1) size += t.size();
  for (const auto& t : theta2) size += t.size();
  Eigen::VectorXd flat(size);
  Eigen::Index pos = 0;
  for (const auto& t : theta1) {
    flat.segment(pos, t.size()) = t;
    pos += t.size();
  }
  flat.segment(pos, gamma1.size()) = gamma1;
  pos += gamma1.size();
  for (const auto& t : theta2) {
    flat.segment(pos, t.size()) = t;
    pos += t.size();
  }
  flat.segment(pos, gamma2.size()) = gamma2;
  return flat;
}

ParamVector ParamVector::unflatten(const ModelSpec& model, const Eigen::VectorXd& flat) {
  if (flat.size() != model.param_count()) {
    throw ShapeError("params: flat vector has " + std::to_string(flat.size()) +
                     " entries, model expects " + std::to_string(model.param_count()));
  }
  ParamVector p;
  Eigen::Index pos = 0;
  for (int b = 0; b < model.theta1_blocks(); ++b) {
    p.theta1.push_back(flat.segment(pos, model.d1));
    pos += model.d1;
  }
  p.gamma1 = flat.segment(pos, model.p1());
  pos += model.p1();
  for (int j = 0; j < model.p2(); ++j) {
    p.theta2.push_back(flat.segment(pos, model.d2));
    pos += model.d2;
  }
  p.gamma2 = flat.segment(pos, model.p2());
  return p;
}

void ParamVector::check_shape(const ModelSpec& model) const {
  auto fail = [](const std::string& what) { throw ShapeError("params: " + what); };
  if (static_cast<int>(theta1.size()) != model.theta1_blocks()) fail("wrong number of theta1 blocks");
  if (static_cast<int>(theta2.size()) != model.p2()) fail("wrong number of theta2 blocks");
  if (gamma1.size() != model.p1()) fail("gamma1 length differs from p1");
  if (gamma2.size() != model.p2()) fail("gamma2 length differs from p2");
  for (const auto& t : theta1) {
    if (t.size() != model.d1) fail("theta1 block length differs from d1");
  }
  for (const auto& t : theta2) {
    if (t.size() != model.d2) fail("theta2 block length differs from d2");
  }
}

void Dataset::validate(const ModelSpec& model) const {
  const auto rows = y.size();
  if (model.p1() > 0 && (X.rows() != rows || X.cols() != model.d1)) {
    throw ShapeError("dataset: X must be n x d1 (" + std::to_string(rows) + " x " +
                     std::to_string(model.d1) + "), got " + std::to_string(X.rows()) +
                     " x " + std::to_string(X.cols()));
  }
  if (model.p2() > 0 && (Z.rows() != rows || Z.cols() != model.d2)) {
    throw ShapeError("dataset: Z must be n x d2 (" + std::to_string(rows) + " x " +
                     std::to_string(model.d2) + "), got " + std::to_string(Z.rows()) +
                     " x " + std::to_string(Z.cols()));
  }
  const int min_rows = std::max(model.d1, model.d2) + model.p1() + model.p2() + 1;
  if (rows < min_rows) {
    throw ShapeError("dataset: need at least " + std::to_string(min_rows) + " rows, got " +
                     std::to_string(rows));
  }
  if (!y.allFinite() || (X.size() > 0 && !X.allFinite()) || (Z.size() > 0 && !Z.allFinite())) {
    throw ConfigError("dataset: contains non-finite entries");
  }
}

double regression_mean(const ModelSpec& model, const ParamVector& params,
                       const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& z) {
  params.check_shape(model);
  if (model.p1() > 0 && x.size() != model.d1) throw ShapeError("regression_mean: x has wrong length");
  if (model.p2() > 0 && z.size() != model.d2) throw ShapeError("regression_mean: z has wrong length");
  double mean = 0.0;
  for (int j = 0; j < model.p1(); ++j) {
    const double u = x.dot(params.theta1[model.theta1_block_of(j)]);
    mean += params.gamma1[j] * model.nonstat_links[j].value(u);
  }
  for (int j = 0; j < model.p2(); ++j) {
    mean += params.gamma2[j] * model.stat_links[j].value(z.dot(params.theta2[j]));
  }
  return mean;
}

Eigen::VectorXd fitted_values(const ModelSpec& model, const ParamVector& params,
                              const Dataset& data) {
  params.check_shape(model);
  data.validate(model);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(data.n());
  for (int j = 0; j < model.p1(); ++j) {
    const Eigen::VectorXd u = data.X * params.theta1[model.theta1_block_of(j)];
    const auto& link = model.nonstat_links[j];
    for (int t = 0; t < data.n(); ++t) mean[t] += params.gamma1[j] * link.value(u[t]);
  }
  for (int j = 0; j < model.p2(); ++j) {
    const Eigen::VectorXd u = data.Z * params.theta2[j];
    const auto& link = model.stat_links[j];
    for (int t = 0; t < data.n(); ++t) mean[t] += params.gamma2[j] * link.value(u[t]);
  }
  return mean;
}

Eigen::VectorXd residuals(const ModelSpec& model, const ParamVector& params,
                          const Dataset& data) {
  return data.y - fitted_values(model, params, data);
}

Eigen::MatrixXd param_jacobian(const ModelSpec& model, const ParamVector& params,
                               const Dataset& data) {
  params.check_shape(model);
  data.validate(model);
  const int n = data.n();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, model.param_count());
  const int gamma1_col = model.theta1_blocks() * model.d1;
  for (int j = 0; j < model.p1(); ++j) {
    const int block = model.theta1_block_of(j);
    const Eigen::VectorXd u = data.X * params.theta1[block];
    const auto& link = model.nonstat_links[j];
    for (int t = 0; t < n; ++t) {
      const double slope = params.gamma1[j] * link.first(u[t]);
      J.row(t).segment(block * model.d1, model.d1) += slope * data.X.row(t);
      J(t, gamma1_col + j) = link.value(u[t]);
    }
  }
  const int theta2_col = model.stat_param_offset();
  const int gamma2_col = theta2_col + model.p2() * model.d2;
  for (int j = 0; j < model.p2(); ++j) {
    const Eigen::VectorXd u = data.Z * params.theta2[j];
    const auto& link = model.stat_links[j];
    for (int t = 0; t < n; ++t) {
      const double slope = params.gamma2[j] * link.first(u[t]);
      J.row(t).segment(theta2_col + j * model.d2, model.d2) = slope * data.Z.row(t);
      J(t, gamma2_col + j) = link.value(u[t]);
    }
  }
  return J;
}

namespace {

// Returns (norm, sign) where sign makes the first nonzero coordinate positive.
std::pair<double, double> unit_scaling(const Eigen::VectorXd& theta) {
  const double norm = theta.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DegenerateError("normalize: index vector is zero or non-finite");
  }
  double sign = 1.0;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    if (theta[k] != 0.0) {
      sign = theta[k] > 0.0 ? 1.0 : -1.0;
      break;
    }
  }
  return {norm, sign};
}

double compensate(const LinkSpec& link, double gamma, double norm, double sign) {
  if (link.kind() == LinkKind::kIdentity) return gamma * norm * sign;
  return gamma;
}

}  // namespace

ParamVector normalize(const ModelSpec& model, const ParamVector& params) {
  params.check_shape(model);
  ParamVector out = params;
  for (int b = 0; b < model.theta1_blocks(); ++b) {
    const auto [norm, sign] = unit_scaling(params.theta1[b]);
    out.theta1[b] = params.theta1[b] * (sign / norm);
    for (int j = 0; j < model.p1(); ++j) {
      if (model.theta1_block_of(j) == b) {
        out.gamma1[j] = compensate(model.nonstat_links[j], params.gamma1[j], norm, sign);
      }
    }
  }
  for (int j = 0; j < model.p2(); ++j) {
    const auto [norm, sign] = unit_scaling(params.theta2[j]);
    out.theta2[j] = params.theta2[j] * (sign / norm);
    out.gamma2[j] = compensate(model.stat_links[j], params.gamma2[j], norm, sign);
  }
  return out;
}

}  // namespace robustm
