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

#include "robustm/dgp.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>

#include "robustm/error.hpp"
#include "robustm/numeric.hpp"

namespace robustm {

namespace {

constexpr int kVarBurnIn = 200;
constexpr double kMixtureWeight = 0.1;  // weight of the N(0, 4) component
constexpr double kMixtureSd = 2.0;

enum Stream : std::uint64_t { kRegressorStream = 1, kStationaryStream = 2, kErrorStream = 3 };

double mixed_normal_cdf(double x) {
  return (1.0 - kMixtureWeight) * normal_cdf(x) + kMixtureWeight * normal_cdf(x / kMixtureSd);
}

void check_square(const Eigen::MatrixXd& m, int d, const std::string& name) {
  if (m.rows() != d || m.cols() != d) {
    throw ShapeError("dgp: " + name + " must be " + std::to_string(d) + "x" + std::to_string(d) +
                     ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (!m.allFinite()) throw ConfigError("dgp: " + name + " has non-finite entries");
}

}  // namespace

ErrorLaw parse_error_law(std::string_view text) {
  if (text == "normal" || text == "d1") return ErrorLaw::kNormal;
  if (text == "mixed_normal" || text == "mixednormal" || text == "d2") return ErrorLaw::kMixedNormal;
  if (text == "t2" || text == "d3") return ErrorLaw::kT2;
  if (text == "cauchy" || text == "t1" || text == "d4") return ErrorLaw::kCauchy;
  throw ConfigError("dgp: unknown error law '" + std::string(text) + "'");
}

std::string to_string(ErrorLaw law) {
  switch (law) {
    case ErrorLaw::kNormal:
      return "normal";
    case ErrorLaw::kMixedNormal:
      return "mixed_normal";
    case ErrorLaw::kT2:
      return "t2";
    case ErrorLaw::kCauchy:
      return "cauchy";
  }
  return "normal";
}

std::string law_tag(ErrorLaw law) {
  return "d" + std::to_string(static_cast<int>(law) + 1);
}

double law_quantile(ErrorLaw law, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("dgp: recentering tau must lie in (0,1)");
  switch (law) {
    case ErrorLaw::kNormal:
      return normal_quantile(tau);
    case ErrorLaw::kT2:
      return (2.0 * tau - 1.0) / std::sqrt(2.0 * tau * (1.0 - tau));
    case ErrorLaw::kCauchy:
      return std::tan(std::numbers::pi * (tau - 0.5));
    case ErrorLaw::kMixedNormal: {
      if (tau == 0.5) return 0.0;
      auto f = [tau](double x) { return mixed_normal_cdf(x) - tau; };
      auto close = [](double a, double b) { return std::abs(b - a) < 1e-12; };
      const double bound = 2.0 * kMixtureSd * std::abs(normal_quantile(tau)) + 1.0;
      const auto [lo, hi] = boost::math::tools::bisect(f, -bound, bound, close);
      return 0.5 * (lo + hi);
    }
  }
  return 0.0;
}

Trend parse_trend(std::string_view text) {
  if (text == "none") return Trend::kNone;
  if (text == "linear") return Trend::kLinear;
  throw ConfigError("dgp: unknown trend '" + std::string(text) + "'");
}

std::string to_string(Trend trend) { return trend == Trend::kNone ? "none" : "linear"; }

DgpConfig DgpConfig::reference_design(int n, ErrorLaw law) {
  DgpConfig c;
  c.n = n;
  c.d1 = 2;
  c.d2 = 2;
  c.rho1 = Eigen::MatrixXd::Identity(2, 2);
  c.sigma1 = Eigen::Vector2d(0.2, 0.5).asDiagonal();
  c.rho2 = 0.5 * Eigen::MatrixXd::Identity(2, 2);
  c.sigma2 = Eigen::MatrixXd::Identity(2, 2);
  c.trend = Trend::kLinear;
  c.error_law = law;
  c.error_scale = 0.5;
  return c;
}

void DgpConfig::validate() const {
  if (n < 1) throw ConfigError("dgp.n must be positive");
  if (d1 < 0 || d2 < 0) throw ConfigError("dgp: dimensions must be nonnegative");
  if (!(error_scale > 0.0) || !std::isfinite(error_scale)) {
    throw ConfigError("dgp.error_scale must be positive");
  }
  if (d1 > 0) {
    check_square(rho1, d1, "rho1");
    check_square(sigma1, d1, "sigma1");
    for (std::size_t j = 0; j < lin_proc_coeffs.size(); ++j) {
      check_square(lin_proc_coeffs[j], d1, "lin_proc_coeffs[" + std::to_string(j) + "]");
    }
  }
  if (d2 > 0) {
    check_square(rho2, d2, "rho2");
    check_square(sigma2, d2, "sigma2");
    const double radius = rho2.eigenvalues().cwiseAbs().maxCoeff();
    if (!(radius < 1.0)) {
      throw ConfigError("dgp.rho2 has spectral radius " + std::to_string(radius) +
                        " (must be < 1)");
    }
  }
  if (quantile_recentering) law_quantile(error_law, *quantile_recentering);
}

bool DgpConfig::unit_root_conformant() const {
  return d1 == 0 || rho1.isIdentity(0.0);
}

Eigen::MatrixXd gen_linear_process(const std::vector<Eigen::MatrixXd>& coeffs, int n, Rng& rng) {
  if (coeffs.empty()) throw ConfigError("gen_linear_process: needs at least A_0");
  const Eigen::Index d = coeffs[0].rows();
  for (const auto& a : coeffs) {
    if (a.rows() != d || a.cols() != d) {
      throw ShapeError("gen_linear_process: coefficient matrices must all be square d x d");
    }
  }
  const int lags = static_cast<int>(coeffs.size()) - 1;
  // eta row (lags + t) holds eta_t; rows 0..lags-1 are the presample.
  Eigen::MatrixXd eta(lags + n, d);
  for (int t = 0; t < n; ++t) {
    for (Eigen::Index k = 0; k < d; ++k) eta(lags + t, k) = rng.normal();
  }
  for (int t = 0; t < lags; ++t) {
    for (Eigen::Index k = 0; k < d; ++k) eta(t, k) = rng.normal();
  }
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, d);
  for (int t = 0; t < n; ++t) {
    for (int j = 0; j <= lags; ++j) {
      w.row(t) += (coeffs[j] * eta.row(lags + t - j).transpose()).transpose();
    }
  }
  return w;
}

Eigen::MatrixXd gen_unit_root(const DgpConfig& config, Rng& rng) {
  const int d = config.d1;
  std::vector<Eigen::MatrixXd> coeffs = config.lin_proc_coeffs;
  if (coeffs.empty()) coeffs.push_back(Eigen::MatrixXd::Identity(d, d));
  const Eigen::MatrixXd w = gen_linear_process(coeffs, config.n, rng);
  Eigen::MatrixXd x(config.n, d);
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(d);
  for (int t = 0; t < config.n; ++t) {
    prev = config.rho1 * prev + config.sigma1 * w.row(t).transpose();
    x.row(t) = prev.transpose();
  }
  return x;
}

Eigen::MatrixXd gen_trending_stationary(const DgpConfig& config, Rng& rng) {
  const int d = config.d2;
  if (d > 0 && !(config.rho2.eigenvalues().cwiseAbs().maxCoeff() < 1.0)) {
    throw ConfigError("dgp.rho2 must have spectral radius < 1");
  }
  Eigen::MatrixXd z(config.n, d);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd eps(d);
  for (int t = -kVarBurnIn; t < config.n; ++t) {
    for (int k = 0; k < d; ++k) eps[k] = rng.normal();
    v = config.rho2 * v + config.sigma2 * eps;
    if (t < 0) continue;
    const double level = config.trend == Trend::kLinear ? (t + 1.0) / config.n : 0.0;
    z.row(t) = (v.array() + level).matrix().transpose();
  }
  return z;
}

Eigen::VectorXd gen_errors(ErrorLaw law, int n, double scale, std::optional<double> recentering,
                           Rng& rng) {
  if (!(scale > 0.0)) throw ConfigError("gen_errors: scale must be positive");
  const double shift = recentering ? law_quantile(law, *recentering) : 0.0;
  Eigen::VectorXd e(n);
  for (int t = 0; t < n; ++t) {
    double u = 0.0;
    switch (law) {
      case ErrorLaw::kNormal:
        u = rng.normal();
        break;
      case ErrorLaw::kMixedNormal: {
        const double pick = rng.uniform();
        const double draw = rng.normal();
        u = pick < kMixtureWeight ? kMixtureSd * draw : draw;
        break;
      }
      case ErrorLaw::kT2: {
        const double p = rng.uniform();
        u = (2.0 * p - 1.0) / std::sqrt(2.0 * p * (1.0 - p));
        break;
      }
      case ErrorLaw::kCauchy:
        u = std::tan(std::numbers::pi * (rng.uniform() - 0.5));
        break;
    }
    e[t] = scale * (u - shift);
  }
  return e;
}

Simulation simulate(const DgpConfig& config, const ModelSpec& model, const ParamVector& truth,
                    std::uint64_t seed) {
  config.validate();
  model.validate();
  truth.check_shape(model);
  if ((model.p1() > 0 && model.d1 != config.d1) || (model.p2() > 0 && model.d2 != config.d2)) {
    throw ShapeError("dgp: model dimensions differ from dgp dimensions");
  }
  Simulation sim;
  sim.model = model;
  sim.truth = truth;
  Rng x_rng(substream_seed(seed, {kRegressorStream}));
  Rng v_rng(substream_seed(seed, {kStationaryStream}));
  Rng e_rng(substream_seed(seed, {kErrorStream}));
  sim.data.X = config.d1 > 0 ? gen_unit_root(config, x_rng) : Eigen::MatrixXd(config.n, 0);
  sim.data.Z = config.d2 > 0 ? gen_trending_stationary(config, v_rng) : Eigen::MatrixXd(config.n, 0);
  sim.errors = gen_errors(config.error_law, config.n, config.error_scale,
                          config.quantile_recentering, e_rng);
  sim.data.y = sim.errors;
  sim.data.y = fitted_values(model, truth, sim.data) + sim.errors;
  // Stored errors are the realized residuals, so residuals at the truth
  // reproduce them bit for bit.
  sim.errors = residuals(model, truth, sim.data);
  const double kurt = sample_kurtosis(sim.errors);
  sim.data.meta = {
      {"seed", seed},
      {"n", config.n},
      {"error_law", to_string(config.error_law)},
      {"error_scale", config.error_scale},
      {"error_kurtosis", std::isfinite(kurt) ? nlohmann::json(kurt) : nlohmann::json(nullptr)},
      {"heavy_tail", !std::isfinite(kurt) || kurt > 10.0},
      {"unit_root_conformant", config.unit_root_conformant()},
  };
  if (config.quantile_recentering) sim.data.meta["quantile_recentering"] = *config.quantile_recentering;
  return sim;
}

ExampleId parse_example(std::string_view text) {
  if (text == "ex51") return ExampleId::kEx51;
  if (text == "ex52") return ExampleId::kEx52;
  throw ConfigError("dgp: unknown example '" + std::string(text) + "' (expected ex51 or ex52)");
}

std::string to_string(ExampleId id) { return id == ExampleId::kEx51 ? "ex51" : "ex52"; }

ModelSpec example_model(ExampleId id) {
  ModelSpec m;
  m.d1 = 2;
  m.d2 = 2;
  if (id == ExampleId::kEx51) {
    m.nonstat_links = {LinkSpec::identity(), LinkSpec::power(2)};
    m.stat_links = {LinkSpec::identity()};
  } else {
    m.nonstat_links = {LinkSpec::gauss_pdf()};
    m.stat_links = {LinkSpec::identity()};
    m.share_theta1 = true;
  }
  return m;
}

ParamVector example_truth(ExampleId id) {
  const Eigen::VectorXd diag = Eigen::Vector2d(1.0, 1.0) / std::numbers::sqrt2;
  ParamVector p;
  if (id == ExampleId::kEx51) {
    p.theta1 = {diag, diag};
    p.gamma1 = Eigen::Vector2d(2.0, 2.0);
  } else {
    p.theta1 = {diag};
    p.gamma1 = Eigen::VectorXd::Constant(1, 2.0);
  }
  p.theta2 = {diag};
  p.gamma2 = Eigen::VectorXd::Constant(1, 1.0);
  return p;
}

Simulation gen_example(ExampleId id, int n, ErrorLaw law, std::uint64_t seed,
                       std::optional<double> recentering) {
  if (n < 50) throw ConfigError("gen_example: n must be at least 50");
  DgpConfig config = DgpConfig::reference_design(n, law);
  config.quantile_recentering = recentering;
  Simulation sim = simulate(config, example_model(id), example_truth(id), seed);
  sim.data.meta["example"] = to_string(id);
  return sim;
}

double sample_kurtosis(const Eigen::VectorXd& v) {
  if (v.size() < 2) return std::nan("");
  const double mean = v.mean();
  const Eigen::ArrayXd c = v.array() - mean;
  const double m2 = c.square().mean();
  const double m4 = c.square().square().mean();
  return m4 / (m2 * m2);
}

}  // namespace robustm
