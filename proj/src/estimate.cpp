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

#include "robustm/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>

#include "robustm/error.hpp"
#include "robustm/numeric.hpp"

namespace robustm {

namespace {

constexpr double kLevelGrowth = 16.0;
constexpr double kMaxOrder = 1e18;
constexpr int kMaxHalvings = 50;
// Accepted Newton fractions below this trigger the reweighted direction.
constexpr double kShortStep = 0.25;
constexpr double kPivotFactor = 64.0 * std::numeric_limits<double>::epsilon();
// Starts whose final losses agree to this relative margin count as tied.
constexpr double kTieTolerance = 1e-12;

// Index of the first column whose Cholesky pivot is too small, or -1. On
// success `l` holds the lower factor.
int cholesky_failure(const Eigen::MatrixXd& a, Eigen::MatrixXd& l) {
  const Eigen::Index p = a.rows();
  l = Eigen::MatrixXd::Zero(p, p);
  const double max_diag = p > 0 ? a.diagonal().maxCoeff() : 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > kPivotFactor * max_diag) || !(max_diag > 0.0)) return static_cast<int>(j);
    d = std::sqrt(d);
    l(j, j) = d;
    for (Eigen::Index i = j + 1; i < p; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / d;
    }
  }
  return -1;
}

Eigen::MatrixXd cholesky_solve(const Eigen::MatrixXd& l, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd y = l.triangularView<Eigen::Lower>().solve(b);
  return l.transpose().triangularView<Eigen::Upper>().solve(y);
}

std::string column_label(const std::vector<std::string>& labels, int col) {
  if (col >= 0 && col < static_cast<int>(labels.size())) return labels[col];
  return "column " + std::to_string(col);
}

double median_abs(const Eigen::VectorXd& v) {
  std::vector<double> a(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) a[i] = std::abs(v[i]);
  const std::size_t mid = a.size() / 2;
  std::nth_element(a.begin(), a.begin() + mid, a.end());
  double med = a[mid];
  if (a.size() % 2 == 0) med = 0.5 * (med + *std::max_element(a.begin(), a.begin() + mid));
  return med;
}

double radical_inverse(int k, int base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (k > 0) {
    result += f * (k % base);
    k /= base;
    f /= base;
  }
  return result;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61,
                           67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137};

// Orthonormal basis of the complement of a unit vector.
Eigen::MatrixXd complement_basis(const Eigen::VectorXd& theta) {
  const Eigen::Index d = theta.size();
  if (d <= 1) return Eigen::MatrixXd(d, 0);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(theta);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  return q.rightCols(d - 1);
}

// Tangent coordinates at a point: each index vector moves on its sphere,
// coefficients move freely. `map` sends tangent steps to flat parameter steps.
struct Tangent {
  std::vector<Eigen::MatrixXd> basis1;
  std::vector<Eigen::MatrixXd> basis2;
  Eigen::MatrixXd map;
  std::vector<std::string> labels;
};

Tangent make_tangent(const ModelSpec& model, const ParamVector& params) {
  Tangent t;
  const auto flat_labels = model.param_labels();
  const int dt1 = std::max(model.d1 - 1, 0);
  const int dt2 = std::max(model.d2 - 1, 0);
  const int p_t = model.theta1_blocks() * dt1 + model.p1() + model.p2() * dt2 + model.p2();
  t.map = Eigen::MatrixXd::Zero(model.param_count(), p_t);
  int row = 0;
  int col = 0;
  auto add_block = [&](const Eigen::VectorXd& theta, int d, std::vector<Eigen::MatrixXd>& store) {
    Eigen::MatrixXd b = complement_basis(theta);
    t.map.block(row, col, d, b.cols()) = b;
    const std::string name = flat_labels[row].substr(0, flat_labels[row].size() - 1);
    for (Eigen::Index k = 0; k < b.cols(); ++k) {
      t.labels.push_back(name + " (direction " + std::to_string(k + 1) + ")");
    }
    col += static_cast<int>(b.cols());
    row += d;
    store.push_back(std::move(b));
  };
  auto add_gamma = [&](int count) {
    for (int j = 0; j < count; ++j) {
      t.map(row, col) = 1.0;
      t.labels.push_back(flat_labels[row]);
      ++row;
      ++col;
    }
  };
  for (const auto& theta : params.theta1) add_block(theta, model.d1, t.basis1);
  add_gamma(model.p1());
  for (const auto& theta : params.theta2) add_block(theta, model.d2, t.basis2);
  add_gamma(model.p2());
  return t;
}

ParamVector retract(const ModelSpec& model, const ParamVector& params, const Tangent& t,
                    const Eigen::VectorXd& delta) {
  ParamVector out = params;
  Eigen::Index pos = 0;
  for (std::size_t b = 0; b < params.theta1.size(); ++b) {
    const auto& basis = t.basis1[b];
    const Eigen::VectorXd moved = params.theta1[b] + basis * delta.segment(pos, basis.cols());
    out.theta1[b] = moved / moved.norm();
    pos += basis.cols();
  }
  out.gamma1 += delta.segment(pos, model.p1());
  pos += model.p1();
  for (std::size_t b = 0; b < params.theta2.size(); ++b) {
    const auto& basis = t.basis2[b];
    const Eigen::VectorXd moved = params.theta2[b] + basis * delta.segment(pos, basis.cols());
    out.theta2[b] = moved / moved.norm();
    pos += basis.cols();
  }
  out.gamma2 += delta.segment(pos, model.p2());
  return out;
}

// Unit norm and positive leading sign; the coefficient absorbs the sign for
// odd links (exactly mean-preserving) and the scale for identity links.
ParamVector canonicalize(const ModelSpec& model, const ParamVector& params) {
  ParamVector out = normalize(model, params);
  auto flipped = [](const Eigen::VectorXd& before, const Eigen::VectorXd& after) {
    return before.dot(after) < 0.0;
  };
  for (int j = 0; j < model.p1(); ++j) {
    const auto& link = model.nonstat_links[j];
    const int b = model.theta1_block_of(j);
    if (link.kind() != LinkKind::kIdentity && link.parity() < 0 &&
        flipped(params.theta1[b], out.theta1[b])) {
      out.gamma1[j] = -out.gamma1[j];
    }
  }
  for (int j = 0; j < model.p2(); ++j) {
    const auto& link = model.stat_links[j];
    if (link.kind() != LinkKind::kIdentity && link.parity() < 0 &&
        flipped(params.theta2[j], out.theta2[j])) {
      out.gamma2[j] = -out.gamma2[j];
    }
  }
  return out;
}

Eigen::MatrixXd link_columns(const ModelSpec& model, const ParamVector& params,
                             const Dataset& data) {
  Eigen::MatrixXd g(data.n(), model.p1() + model.p2());
  for (int j = 0; j < model.p1(); ++j) {
    const Eigen::VectorXd u = data.X * params.theta1[model.theta1_block_of(j)];
    for (int t = 0; t < data.n(); ++t) g(t, j) = model.nonstat_links[j].value(u[t]);
  }
  for (int j = 0; j < model.p2(); ++j) {
    const Eigen::VectorXd u = data.Z * params.theta2[j];
    for (int t = 0; t < data.n(); ++t) g(t, model.p1() + j) = model.stat_links[j].value(u[t]);
  }
  return g;
}

void set_gamma_by_least_squares(const ModelSpec& model, const Dataset& data, ParamVector& p) {
  const Eigen::MatrixXd g = link_columns(model, p, data);
  const Eigen::VectorXd coef = g.completeOrthogonalDecomposition().solve(data.y);
  p.gamma1 = coef.head(model.p1());
  p.gamma2 = coef.tail(model.p2());
}

Eigen::VectorXd unit_or_first_axis(const Eigen::VectorXd& v) {
  const double norm = v.norm();
  if (norm > 0.0 && std::isfinite(norm)) return v / norm;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(v.size());
  e[0] = 1.0;
  return e;
}

ParamVector warm_start(const ModelSpec& model, const Dataset& data) {
  const int cx = model.p1() > 0 ? model.d1 : 0;
  const int cz = model.p2() > 0 ? model.d2 : 0;
  Eigen::MatrixXd a(data.n(), cx + cz);
  if (cx > 0) a.leftCols(cx) = data.X;
  if (cz > 0) a.rightCols(cz) = data.Z;
  const Eigen::VectorXd b = a.completeOrthogonalDecomposition().solve(data.y);
  ParamVector p;
  for (int k = 0; k < model.theta1_blocks(); ++k) p.theta1.push_back(unit_or_first_axis(b.head(cx)));
  for (int k = 0; k < model.p2(); ++k) p.theta2.push_back(unit_or_first_axis(b.tail(cz)));
  set_gamma_by_least_squares(model, data, p);
  return p;
}

Eigen::VectorXd sphere_point(int k, int d, int& prime_index) {
  Eigen::VectorXd v(d);
  if (d == 1) {
    v[0] = 1.0;
  } else if (d == 2) {
    const double angle = std::numbers::pi * (radical_inverse(k, kPrimes[prime_index++ % 33]) - 0.5);
    v << std::cos(angle), std::sin(angle);
  } else {
    for (int i = 0; i < d; ++i) {
      v[i] = normal_quantile(radical_inverse(k, kPrimes[prime_index++ % 33]));
    }
    v /= v.norm();
    if (v[0] < 0.0) v = -v;
  }
  return v;
}

ParamVector halton_start(const ModelSpec& model, const Dataset& data, int k) {
  ParamVector p;
  int prime_index = 0;
  for (int b = 0; b < model.theta1_blocks(); ++b) p.theta1.push_back(sphere_point(k, model.d1, prime_index));
  for (int j = 0; j < model.p2(); ++j) p.theta2.push_back(sphere_point(k, model.d2, prime_index));
  set_gamma_by_least_squares(model, data, p);
  return p;
}

struct Trial {
  ParamVector params;
  Eigen::VectorXd e;
  double value = 0.0;
  double alpha = 0.0;
  double step = 0.0;
};

// Cholesky solve of h x = g, with a Levenberg shift when h is not positive
// definite.
std::optional<Eigen::VectorXd> solve_step(Eigen::MatrixXd h, const Eigen::VectorXd& g) {
  Eigen::MatrixXd l;
  if (cholesky_failure(h, l) >= 0) {
    h.diagonal().array() += 1e-10 * std::max(h.diagonal().maxCoeff(), 1.0);
    if (cholesky_failure(h, l) >= 0) return std::nullopt;
  }
  Eigen::VectorXd delta = cholesky_solve(l, g);
  if (!delta.allFinite()) return std::nullopt;
  return delta;
}

struct StartOutcome {
  ParamVector params;
  double start_loss = 0.0;
  double final_loss = 0.0;
  int iterations = 0;
  bool converged = false;
  Eigen::VectorXd target_residuals;
  std::vector<double> trace;
};

class Derivatives {
 public:
  Derivatives(const LossSpec& loss, double m) : loss_(loss), m_(m) {}
  double first(double e) const {
    if (loss_.kind() == LossKind::kSquaredError) return subgrad(loss_, e);
    return mollified_grad(loss_, m_, e);
  }
  double second(double e) const {
    if (loss_.kind() == LossKind::kSquaredError) return 2.0 * loss_.scale();
    return mollified_hess(loss_, m_, e);
  }
  // Curvature of the quadratic majorizer at e: the symmetric part of the
  // slope divided by e (its limit, the second derivative, near zero).
  double majorizer(double e) const {
    if (std::abs(e) * std::sqrt(m_.value()) < 1e-6) return second(e);
    double slope = first(e);
    if (loss_.kind() == LossKind::kQuantile) slope -= (loss_.param() - 0.5) * loss_.scale();
    return slope / e;
  }

 private:
  LossSpec loss_;
  MollifierOrder m_;
};

StartOutcome run_start(const ModelSpec& model, const Dataset& data, const FitOptions& opts,
                       ParamVector params, double m_target) {
  StartOutcome out;
  const bool smooth = opts.loss.kind() == LossKind::kSquaredError;
  Eigen::VectorXd e = residuals(model, params, data);
  double current = objective_value(opts.loss, e);
  out.start_loss = current;
  out.trace.push_back(current);

  {
    // Design rank at the start point.
    const Tangent t = make_tangent(model, params);
    const Eigen::MatrixXd jt = param_jacobian(model, params, data) * t.map;
    checked_cholesky(jt.transpose() * jt, t.labels);
  }

  double m = m_target;
  if (!smooth) {
    const double scale = 1.4826 * median_abs(e);
    if (scale > 0.0) m = std::clamp(1.0 / (2.0 * scale * scale), 1.0, m_target);
  }
  // Backtracking on the exact objective along a tangent direction.
  auto line_search = [&](const Tangent& t, const Eigen::VectorXd& delta) -> std::optional<Trial> {
    double alpha = 1.0;
    for (int k = 0; k < kMaxHalvings; ++k, alpha *= opts.damping) {
      ParamVector trial = retract(model, params, t, alpha * delta);
      Eigen::VectorXd e_trial = residuals(model, trial, data);
      const double value = objective_value(opts.loss, e_trial);
      if (value < current) {
        return Trial{std::move(trial), std::move(e_trial), value, alpha,
                     alpha * delta.cwiseAbs().maxCoeff()};
      }
    }
    return std::nullopt;
  };
  bool accepted_any = false;
  bool reached_target = false;
  bool capped_at_target = false;
  while (true) {
    const Derivatives deriv(opts.loss, m);
    const double level_tol = smooth ? opts.tol : std::max(opts.tol, 1e-2 / std::sqrt(m));
    enum class Exit { kSmallStep, kNoDescent, kMaxIter } exit = Exit::kMaxIter;
    for (int it = 0; it < opts.max_iter; ++it) {
      const Tangent t = make_tangent(model, params);
      const Eigen::MatrixXd jt = param_jacobian(model, params, data) * t.map;
      Eigen::VectorXd psi(e.size());
      Eigen::VectorXd w(e.size());
      for (Eigen::Index i = 0; i < e.size(); ++i) {
        psi[i] = deriv.first(e[i]);
        w[i] = deriv.second(e[i]);
      }
      Eigen::MatrixXd h = jt.transpose() * w.asDiagonal() * jt;
      h.diagonal().array() += opts.ridge;
      const Eigen::VectorXd g = jt.transpose() * psi;
      const std::optional<Eigen::VectorXd> delta = solve_step(h, g);
      if (!delta) {
        exit = Exit::kNoDescent;
        break;
      }
      const double full = delta->cwiseAbs().maxCoeff();
      if (full < level_tol) {
        exit = Exit::kSmallStep;
        break;
      }
      std::optional<Trial> best = line_search(t, *delta);
      if (!smooth && (!best || best->alpha < kShortStep)) {
        // Newton is crawling; try the reweighted least-squares direction too.
        Eigen::VectorXd v(e.size());
        for (Eigen::Index i = 0; i < e.size(); ++i) v[i] = deriv.majorizer(e[i]);
        Eigen::MatrixXd hm = jt.transpose() * v.asDiagonal() * jt;
        hm.diagonal().array() += opts.ridge;
        if (const auto dm = solve_step(hm, g)) {
          std::optional<Trial> alt = line_search(t, *dm);
          if (alt && (!best || alt->value < best->value)) best = std::move(alt);
        }
      }
      if (!best) {
        exit = Exit::kNoDescent;
        break;
      }
      params = std::move(best->params);
      e = std::move(best->e);
      current = best->value;
      const double moved = best->step;
      accepted_any = true;
      ++out.iterations;
      out.trace.push_back(current);
      if (moved < level_tol) {
        exit = Exit::kSmallStep;
        break;
      }
    }
    if (m >= m_target && exit == Exit::kMaxIter) capped_at_target = true;
    if (m >= m_target && !reached_target) {
      reached_target = true;
      out.target_residuals = e;
    }
    const bool last = smooth || m >= kMaxOrder;
    if (last) {
      out.converged = !capped_at_target &&
                      (exit == Exit::kSmallStep ||
                       (exit == Exit::kNoDescent && (accepted_any || current == 0.0)));
      break;
    }
    double next = m * kLevelGrowth;
    if (m < m_target && next > m_target) next = m_target;
    m = std::min(next, kMaxOrder);
  }
  if (out.target_residuals.size() == 0) out.target_residuals = e;
  out.params = params;
  out.final_loss = current;
  return out;
}

// Stationary-block tangent map: p2 (d2 + 1) rows, p2 d2 columns.
Eigen::MatrixXd stationary_tangent(const ModelSpec& model, const ParamVector& params) {
  const int rows = model.p2() * (model.d2 + 1);
  const int cols = model.p2() * model.d2;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(rows, cols);
  int col = 0;
  for (int j = 0; j < model.p2(); ++j) {
    const Eigen::MatrixXd b = complement_basis(params.theta2[j]);
    t.block(j * model.d2, col, model.d2, b.cols()) = b;
    col += static_cast<int>(b.cols());
  }
  for (int j = 0; j < model.p2(); ++j) t(model.p2() * model.d2 + j, col++) = 1.0;
  return t;
}

}  // namespace

void FitOptions::validate() const {
  if (!(tol > 0.0)) throw ConfigError("fit.tol must be positive");
  if (max_iter < 1) throw ConfigError("fit.max_iter must be >= 1");
  if (multistart && *multistart < 1) throw ConfigError("fit.multistart must be >= 1");
  if (!(m_epsilon > 0.0)) throw ConfigError("fit.m_epsilon must be positive");
  if (!(damping > 0.0 && damping < 1.0)) throw ConfigError("fit.damping must lie in (0,1)");
  if (!(ridge >= 0.0)) throw ConfigError("fit.ridge must be nonnegative");
}

int FitOptions::starts_for(const ModelSpec& model) const {
  if (multistart) return *multistart;
  return model.all_identity() ? 1 : 8;
}

Eigen::MatrixXd checked_cholesky(const Eigen::MatrixXd& a, const std::vector<std::string>& labels) {
  if (a.rows() != a.cols()) throw ShapeError("cholesky: matrix must be square");
  Eigen::MatrixXd l;
  const int bad = cholesky_failure(a, l);
  if (bad >= 0) {
    throw RankError("rank deficient normal matrix: no independent information for '" +
                    column_label(labels, bad) + "'");
  }
  return l;
}

Eigen::VectorXd quadratic_minimizer(const Eigen::MatrixXd& J, const Eigen::VectorXd& psi_e,
                                    double a2, double ridge,
                                    const std::vector<std::string>& labels) {
  if (J.rows() != psi_e.size()) throw ShapeError("quadratic_minimizer: J and psi_e disagree on n");
  if (!(a2 > 0.0)) throw ConfigError("quadratic_minimizer: a2 must be positive");
  const double n = static_cast<double>(J.rows());
  Eigen::MatrixXd a = (a2 / n) * (J.transpose() * J);
  a.diagonal().array() += ridge;
  const Eigen::MatrixXd l = checked_cholesky(a, labels);
  return cholesky_solve(l, J.transpose() * psi_e / std::sqrt(n));
}

double objective_value(const LossSpec& loss, const Eigen::VectorXd& residuals) {
  double total = 0.0;
  for (double e : residuals) total += eval_loss(loss, e);
  return total;
}

FitResult fit(const ModelSpec& model, const Dataset& data, const FitOptions& opts) {
  opts.validate();
  model.validate();
  data.validate(model);
  const double m_target = MollifierOrder::from_sample_size(data.n(), opts.m_epsilon).value();

  // The argmin does not depend on the loss scale, so starts run on the
  // unit-scale loss and only reported values carry the scale.
  FitOptions inner = opts;
  inner.loss = opts.loss.unit();
  const double scale = opts.loss.scale();

  const int starts = opts.starts_for(model);
  std::optional<StartOutcome> best;
  int best_index = -1;
  std::exception_ptr first_error;
  for (int k = 0; k < starts; ++k) {
    try {
      ParamVector init;
      if (k == 0) {
        init = opts.initial ? canonicalize(model, *opts.initial) : warm_start(model, data);
      } else {
        init = halton_start(model, data, k);
      }
      StartOutcome outcome = run_start(model, data, inner, std::move(init), m_target);
      if (!best || outcome.final_loss < best->final_loss - kTieTolerance * std::abs(best->final_loss)) {
        best = std::move(outcome);
        best_index = k;
      }
    } catch (const RankError&) {
      if (!first_error) first_error = std::current_exception();
    } catch (const DegenerateError&) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (!best) std::rethrow_exception(first_error);

  FitResult result;
  result.params = canonicalize(model, best->params);
  result.residuals = residuals(model, result.params, data);
  result.loss_value = objective_value(opts.loss, result.residuals);
  result.objective = result.loss_value - scale * best->start_loss;
  result.iterations = best->iterations;
  result.converged = best->converged;
  result.start_index = best_index;
  result.loss_trace = std::move(best->trace);
  for (double& v : result.loss_trace) v *= scale;
  result.a1_hat = estimate_a1(result.residuals, opts.loss);
  result.a2_hat = estimate_a2(best->target_residuals, opts.loss, MollifierOrder(m_target));
  if (model.p2() > 0) {
    result.sigma_hat = estimate_sigma(model, result.params, data);
    try {
      const Eigen::MatrixXd t = stationary_tangent(model, result.params);
      const Eigen::MatrixXd cov_t = stationary_covariance(
          result.a1_hat, result.a2_hat, t.transpose() * result.sigma_hat * t, data.n());
      result.stat_cov = t * cov_t * t.transpose();
    } catch (const Error&) {
      result.stat_cov.resize(0, 0);
    }
  }
  return result;
}

double estimate_a1(const Eigen::VectorXd& residuals, const LossSpec& loss) {
  if (residuals.size() == 0) throw ShapeError("estimate_a1: empty residual vector");
  double total = 0.0;
  for (double e : residuals) {
    const double g = subgrad(loss, e);
    total += g * g;
  }
  return total / static_cast<double>(residuals.size());
}

double estimate_a2(const Eigen::VectorXd& residuals, const LossSpec& loss, MollifierOrder m) {
  if (residuals.size() == 0) throw ShapeError("estimate_a2: empty residual vector");
  if (loss.kind() == LossKind::kSquaredError) return 2.0 * loss.scale();
  double total = 0.0;
  for (double e : residuals) total += mollified_hess(loss, m, e);
  return total / static_cast<double>(residuals.size());
}

Eigen::MatrixXd estimate_sigma(const ModelSpec& model, const ParamVector& params,
                               const Dataset& data) {
  if (model.p2() == 0) throw ShapeError("estimate_sigma: model has no stationary block");
  const Eigen::MatrixXd j = param_jacobian(model, params, data);
  const Eigen::MatrixXd s = j.rightCols(model.param_count() - model.stat_param_offset());
  Eigen::MatrixXd sigma = s.transpose() * s / static_cast<double>(data.n());
  return 0.5 * (sigma + sigma.transpose());
}

Eigen::MatrixXd stationary_covariance(double a1, double a2, const Eigen::MatrixXd& sigma_hat,
                                      int n) {
  if (!(a2 > 0.0)) throw UndefinedError("stationary_covariance: a2 must be positive");
  if (n < 1) throw ShapeError("stationary_covariance: n must be positive");
  const Eigen::MatrixXd l = checked_cholesky(sigma_hat);
  const Eigen::Index p = sigma_hat.rows();
  const Eigen::MatrixXd inv = cholesky_solve(l, Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd cov = (a1 / (a2 * a2)) * inv / static_cast<double>(n);
  return 0.5 * (cov + cov.transpose());
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

nlohmann::json params_to_json(const ParamVector& params) {
  nlohmann::json j;
  j["theta1"] = nlohmann::json::array();
  for (const auto& t : params.theta1) j["theta1"].push_back(vector_json(t));
  j["gamma1"] = vector_json(params.gamma1);
  j["theta2"] = nlohmann::json::array();
  for (const auto& t : params.theta2) j["theta2"].push_back(vector_json(t));
  j["gamma2"] = vector_json(params.gamma2);
  return j;
}

ParamVector params_from_json(const ModelSpec& model, const nlohmann::json& j) {
  ParamVector p;
  try {
    // blocks of an empty link set may be omitted
    if (model.p1() > 0 || j.contains("theta1")) {
      for (const auto& t : j.at("theta1")) p.theta1.push_back(vector_from_json(t));
      p.gamma1 = vector_from_json(j.at("gamma1"));
    }
    if (model.p2() > 0 || j.contains("theta2")) {
      for (const auto& t : j.at("theta2")) p.theta2.push_back(vector_from_json(t));
      p.gamma2 = vector_from_json(j.at("gamma2"));
    }
  } catch (const nlohmann::json::exception& err) {
    throw ConfigError(std::string("params: ") + err.what());
  }
  p.check_shape(model);
  return p;
}

nlohmann::json fit_result_to_json(const ModelSpec& model, const FitResult& result) {
  nlohmann::json j;
  j["params"] = params_to_json(result.params);
  nlohmann::json named = nlohmann::json::object();
  const auto labels = model.param_labels();
  const Eigen::VectorXd flat = result.params.flatten();
  for (std::size_t i = 0; i < labels.size(); ++i) named[labels[i]] = flat[static_cast<Eigen::Index>(i)];
  j["param_values"] = named;
  j["a1_hat"] = result.a1_hat;
  j["a2_hat"] = result.a2_hat;
  j["sigma_hat"] = matrix_to_json(result.sigma_hat);
  j["stat_cov"] = result.stat_cov.size() > 0 ? matrix_to_json(result.stat_cov) : nlohmann::json(nullptr);
  j["objective"] = result.objective;
  j["loss_value"] = result.loss_value;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["start_index"] = result.start_index;
  return j;
}

nlohmann::json fit_options_to_json(const FitOptions& opts) {
  nlohmann::json j = {{"loss", opts.loss.to_string()}, {"m_epsilon", opts.m_epsilon},
                      {"tol", opts.tol},               {"max_iter", opts.max_iter},
                      {"damping", opts.damping},       {"ridge", opts.ridge}};
  j["multistart"] = opts.multistart ? nlohmann::json(*opts.multistart) : nlohmann::json();
  if (opts.initial) j["initial"] = params_to_json(*opts.initial);
  return j;
}

}  // namespace robustm
