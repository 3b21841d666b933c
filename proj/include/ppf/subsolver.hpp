#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "ppf/barrier.hpp"
#include "ppf/prox.hpp"
#include "ppf/sym.hpp"

namespace ppf {

// Strongly convex quadratic composite model of one path-following step:
//   minimize  <h, x - x_k> + 1/2 ||x - x_k||_M^2 + (1/t) g(x).
struct QuadraticModel {
  VectorXd anchor;        // x_k
  MetricFactor metric;    // Hessian factorization at x_k
  VectorXd smooth_linear; // h = grad f(x_k) - eta*zeta0 + c/t
  const ProxFn* nonsmooth = nullptr;
  double t = 1.0;

  double smooth_value(const VectorXd& x) const {
    const VectorXd d = x - anchor;
    return smooth_linear.dot(d) + 0.5 * metric.quadform(d);
  }

  VectorXd smooth_grad(const VectorXd& x) const {
    return smooth_linear + metric.apply(x - anchor);
  }

  double objective(const VectorXd& x) const {
    return smooth_value(x) + nonsmooth->value(x) / t;
  }
};

struct SubSolution {
  VectorXd z;
  double gap_bound = 0.0;
  int iters = 0;
};

struct SubsolverFailure : std::runtime_error {
  SubsolverFailure(std::string what, SubSolution best)
      : std::runtime_error(std::move(what)), best(std::move(best)) {}
  SubSolution best;
};

struct SpectrumBounds {
  double L = 0.0;  // >= lambda_max
  double mu = 0.0; // <= lambda_min
};

inline SpectrumBounds spectrum_bounds(const MetricFactor& m) {
  SpectrumBounds s;
  s.L = m.largest_eigenvalue();
  s.mu = m.smallest_eigenvalue();
  if (s.mu <= 0.0 || !std::isfinite(s.L))
    throw ConditioningError("spectrum_bounds: degenerate metric");
  return s;
}

inline QuadraticModel build_model(const Barrier& b, const VectorXd& x_k,
                                  const VectorXd& zeta0, double eta, const VectorXd& c,
                                  double t, const ProxFn& g) {
  if (t <= 0.0) throw std::invalid_argument("build_model: t must be positive");
  const BarrierEval e = b.evaluate(x_k);
  if (!e.interior()) throw std::domain_error("build_model: anchor is not interior");
  QuadraticModel model{x_k, b.metric_at(x_k), e.gradient - eta * zeta0 + c / t, &g, t};
  return model;
}

// Number of FISTA iterations sufficient for a delta-solution at condition
// number kappa, for the certified-gap target delta^2/2.
inline int fista_iteration_bound(double kappa, double beta, double delta) {
  return static_cast<int>(std::floor(std::sqrt(kappa) * std::log(beta * (1.0 + kappa) / delta))) + 1;
}

// Accelerated proximal gradient with strong-convexity momentum and
// function-value restart.  The returned gap bound is the strong-convexity
// certificate ||s||^2 / (2 mu) for an exact subgradient s of the model
// objective at the returned point; success means gap_bound <= delta^2/2.
inline SubSolution solve(const QuadraticModel& model, double delta,
                         double beta_for_cap = 1.0 / 9.0) {
  if (delta <= 0.0) throw std::invalid_argument("subsolver: delta must be positive");
  const SpectrumBounds spec = spectrum_bounds(model.metric);
  const double L = spec.L, mu = spec.mu;
  const double kappa = L / mu;
  const double theta = (std::sqrt(L) - std::sqrt(mu)) / (std::sqrt(L) + std::sqrt(mu));
  const int cap = 100 * std::max(1, fista_iteration_bound(kappa, beta_for_cap, delta));
  const double target = 0.5 * delta * delta;
  const ProxFn& g = *model.nonsmooth;

  // Start from a g-feasible point near the anchor.
  VectorXd x = model.anchor;
  if (!std::isfinite(g.value(x))) x = g.prox(1.0, x);
  VectorXd y = x;
  double fx = model.objective(x);

  SubSolution best{x, kInfinity, 0};
  for (int j = 1; j <= cap; ++j) {
    const VectorXd grad_y = model.smooth_grad(y);
    const VectorXd x_next = g.prox(1.0 / (model.t * L), y - grad_y / L);

    // s = L(y - x_next) - grad q(y) + grad q(x_next) lies in the model's
    // subdifferential at x_next.
    const VectorXd s = L * (y - x_next) - grad_y + model.smooth_grad(x_next);
    const double gap = s.squaredNorm() / (2.0 * mu);
    if (gap < best.gap_bound) best = SubSolution{x_next, gap, j};
    if (gap <= target) return SubSolution{x_next, gap, j};

    const double fx_next = model.objective(x_next);
    if (fx_next > fx) {
      y = x_next;  // restart momentum
    } else {
      y = x_next + theta * (x_next - x);
    }
    x = x_next;
    fx = fx_next;
  }
  best.iters = cap;
  throw SubsolverFailure("subsolver: iteration cap exceeded", best);
}

// Exact KKT solution when the nonsmooth part is the affine diagonal
// indicator (or absent): one metric solve plus a p x p Schur correction for
// diag(X) = e.
inline VectorXd solve_affine_exact(const QuadraticModel& model) {
  const ProxFn& g = *model.nonsmooth;
  VectorXd x = model.anchor - model.metric.solve(model.smooth_linear);
  if (g.kind() == ProxKind::Zero) return x;
  if (g.kind() != ProxKind::AffineDiag)
    throw std::invalid_argument("solve_affine_exact: needs an affine-diagonal indicator");

  const int p = g.matrix_dim();
  const int d = static_cast<int>(x.size());
  Eigen::MatrixXd minv_at(d, p);  // columns M^{-1} e_{diag(i)}
  for (int i = 0; i < p; ++i) {
    VectorXd e = VectorXd::Zero(d);
    e[packed_diag_index(i)] = 1.0;
    minv_at.col(i) = model.metric.solve(e);
  }
  Eigen::MatrixXd schur(p, p);
  VectorXd resid(p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) schur(i, j) = minv_at(packed_diag_index(i), j);
    resid[i] = x[packed_diag_index(i)] - 1.0;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(schur);
  if (ldlt.info() != Eigen::Success)
    throw ConditioningError("solve_affine_exact: singular Schur complement");
  const VectorXd lambda = ldlt.solve(resid);
  x -= minv_at * lambda;
  for (int i = 0; i < p; ++i) x[packed_diag_index(i)] = 1.0;  // exact feasibility
  return x;
}

// Metric proximity operator prox_g(u) in the norm induced by M, solved to a
// certified gap of tol^2/2.  Property-test helper.
inline VectorXd generalized_prox(const ProxFn& g, const VectorXd& u, MetricFactor m,
                                 double tol) {
  QuadraticModel model{u, std::move(m), VectorXd::Zero(u.size()), &g, 1.0};
  return solve(model, tol).z;
}

}  // namespace ppf
