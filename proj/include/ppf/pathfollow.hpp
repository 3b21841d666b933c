#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ppf/barrier.hpp"
#include "ppf/problems.hpp"
#include "ppf/prox.hpp"
#include "ppf/subsolver.hpp"

namespace ppf {

struct InitializationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- Initialization and stopping-rule scalars -------------------------------

inline double a0_constant(double beta, double n_nu) {
  if (beta <= 0.0 || beta >= 1.0 || n_nu < 1.0)
    throw std::invalid_argument("a0: beta in (0,1) and n_nu >= 1 required");
  return (1.0 - beta) / ((3.0 + beta) * n_nu);
}

inline double kappa_max(double a0) {
  if (a0 <= 0.0 || a0 > 1.0 / 3.0) throw std::invalid_argument("kappa_max: a0 in (0, 1/3]");
  return 0.5 * (2.0 * a0 + 1.0 - std::sqrt(4.0 * a0 * a0 + 1.0));
}

inline constexpr double kBetaMaxInexact = 1.0 / 9.0;
inline constexpr double kBetaMaxExact = 0.116764;

// Defaults maximize the shrink factor over the admissible beta range.
inline constexpr double kDefaultBetaInexact = 0.042231;
inline constexpr double kDefaultBetaExact = 0.045864;

inline double c_beta(double beta, bool exact_variant) {
  const double beta_max = exact_variant ? kBetaMaxExact : kBetaMaxInexact;
  if (beta <= 0.0 || beta > beta_max)
    throw std::invalid_argument("c_beta: beta outside the admissible range");
  const double a = (exact_variant ? 0.45 : 0.43) * std::sqrt(beta);
  return 0.5 * (1.0 + a - std::sqrt((1.0 - a) * (1.0 - a) + 4.0 * beta));
}

inline double sigma_beta(double c_beta_value, double nu) {
  if (c_beta_value <= 0.0 || nu <= 0.0)
    throw std::invalid_argument("sigma_beta: positive arguments required");
  return c_beta_value / ((1.0 + c_beta_value) * std::sqrt(nu));
}

inline double t0_lower_bound(double c0, double kappa, double beta, double n_nu) {
  if (c0 == 0.0) return 0.0;
  const double denom =
      (1.0 - 2.0 * kappa) * (1.0 - beta) - kappa * (1.0 - kappa) * (3.0 + beta) * n_nu;
  if (denom <= 0.0)
    throw InitializationError("t0_lower_bound: infeasible initialization (kappa too large)");
  return c0 * (1.0 - kappa) * (3.0 + beta) * n_nu / denom;
}

inline double psi_beta(double nu, double m_hat0, double gamma_hat0, double gamma1,
                       double delta) {
  if (gamma_hat0 >= 1.0) throw std::invalid_argument("psi_beta: gamma_hat0 must be < 1");
  const double r = 1.0 - gamma_hat0;
  return nu + std::sqrt(nu) * gamma1 / r +
         gamma_hat0 / (r * r) * (gamma_hat0 + gamma1 + delta) + 0.5 * delta * delta +
         m_hat0 * gamma1;
}

// Smallest k with (1-sigma)^k t0 psi <= epsilon; zero when t0 already
// satisfies the stopping rule.
inline int k_max_bound(double psi, double t0, double epsilon, double sigma) {
  if (psi <= 0.0 || t0 <= 0.0 || epsilon <= 0.0 || sigma <= 0.0 || sigma >= 1.0)
    throw std::invalid_argument("k_max_bound: invalid arguments");
  const double ratio = t0 * psi / epsilon;
  if (ratio <= 1.0) return 0;
  return static_cast<int>(std::floor(std::log(ratio) / (-std::log1p(-sigma)))) + 1;
}

// ---- Solver configuration and certificates ----------------------------------

struct SolverConfig {
  std::optional<double> beta;   // default depends on the variant
  double epsilon = 1e-3;
  bool exact_variant = false;
  std::optional<double> t0;     // override / manual value
  std::optional<VectorXd> x0;   // manual mode when set
  std::optional<double> delta;  // subsolver accuracy override
  int max_iterations = 100000;
  bool record_iterates = false;

  double resolved_beta() const {
    return beta ? *beta : (exact_variant ? kDefaultBetaExact : kDefaultBetaInexact);
  }
};

struct InitCertificate {
  VectorXd x0;
  VectorXd xi0;
  VectorXd zeta0;
  double eta = 1.0;
  double kappa = 0.0;
  double a0 = 0.0;
  double c0 = 0.0;
  double t0 = 0.0;
  double m_hat0 = 0.0;
  double gamma1 = 0.0;
  double gamma_hat0 = 0.0;
  double delta = 0.0;
  double beta = 0.0;
  double c_beta = 0.0;
  double sigma_beta = 0.0;
  double psi = 0.0;
  bool theoretical_mode = true;
  bool preconditions_hold = true;  // kappa and m_hat0 inside the theory
  bool psi_from_formula = true;    // false: fallback psi = nu
};

enum class SolveStatus { Converged, IterationCap, SubsolverFailure };

struct TraceRecord {
  int k = 0;
  double t = 0.0;
  double objective = 0.0;
  int sub_iters = 0;
  double gap_bound = 0.0;
  double wall_ms = 0.0;
};

struct SolveTrace {
  std::vector<TraceRecord> records;
  SolveStatus status = SolveStatus::Converged;
};

struct SolveResult {
  VectorXd x;
  double objective = 0.0;
  SolveTrace trace;
  InitCertificate cert;
  std::vector<VectorXd> iterates;  // filled when config.record_iterates
};

namespace detail {

// Subgradient xi0 of g at x0.  For indicator kinds at a feasible point the
// normal cone of the diagonal constraints is the span of the diagonal
// coordinates; the diagonal matrix minimizing ||c + xi||* at x0 solves a
// p x p system in the inverse metric.
inline VectorXd initial_subgradient(const CompositeProblem& problem, const VectorXd& x0,
                                    const MetricFactor& metric) {
  const ProxFn& g = problem.g;
  switch (g.kind()) {
    case ProxKind::Zero:
    case ProxKind::Box:
      return VectorXd::Zero(x0.size());
    case ProxKind::L1:
      return VectorXd(x0.unaryExpr(
          [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }));
    case ProxKind::AffineDiag:
    case ProxKind::ElliptopeK: {
      const int p = g.matrix_dim();
      const int d = static_cast<int>(x0.size());
      Eigen::MatrixXd minv_at(d, p);
      for (int i = 0; i < p; ++i) {
        VectorXd e = VectorXd::Zero(d);
        e[packed_diag_index(i)] = 1.0;
        minv_at.col(i) = metric.solve(e);
      }
      Eigen::MatrixXd schur(p, p);
      VectorXd rhs(p);
      const VectorXd minv_c = metric.solve(problem.c);
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) schur(i, j) = minv_at(packed_diag_index(i), j);
        rhs[i] = -minv_c[packed_diag_index(i)];
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(schur);
      if (ldlt.info() != Eigen::Success) return VectorXd::Zero(d);
      const VectorXd y = ldlt.solve(rhs);
      VectorXd xi = VectorXd::Zero(d);
      for (int i = 0; i < p; ++i) xi[packed_diag_index(i)] = y[i];
      return xi;
    }
  }
  return VectorXd::Zero(x0.size());
}

}  // namespace detail

inline InitCertificate init(const CompositeProblem& problem, const SolverConfig& config) {
  const Barrier& b = problem.barrier;
  const double beta = config.resolved_beta();
  c_beta(beta, config.exact_variant);  // validates the range
  const double n_nu = b.n_nu();
  const double nu = b.nu();

  InitCertificate cert;
  cert.beta = beta;
  cert.eta = 1.0;
  cert.a0 = a0_constant(beta, n_nu);
  cert.theoretical_mode = !config.x0.has_value();

  if (cert.theoretical_mode) {
    const auto center = b.analytic_center();
    if (!center)
      throw InitializationError(
          "init: barrier has no analytic center; pass a manual starting point");
    cert.x0 = *center;
  } else {
    cert.x0 = *config.x0;
    if (!config.t0)
      throw InitializationError("init: manual mode requires an explicit t0");
  }

  const BarrierEval e0 = b.evaluate(cert.x0);
  if (!e0.interior()) throw InitializationError("init: starting point is not interior");
  if (!std::isfinite(problem.g.value(cert.x0)))
    throw InitializationError("init: starting point is infeasible for g");
  const MetricFactor m0 = b.metric_at(cert.x0);
  cert.kappa = m0.dual_norm(e0.gradient);
  cert.xi0 = detail::initial_subgradient(problem, cert.x0, m0);
  cert.c0 = m0.dual_norm(problem.c + cert.xi0);

  const double kmax = kappa_max(cert.a0);
  const bool kappa_ok = cert.kappa < kmax;
  if (cert.theoretical_mode && !kappa_ok)
    throw InitializationError("init: ||grad f(x0)||* exceeds the admissible kappa bound");

  if (config.t0) {
    cert.t0 = *config.t0;
    if (cert.t0 <= 0.0) throw InitializationError("init: t0 must be positive");
  } else {
    cert.t0 = 1.25 * t0_lower_bound(cert.c0, cert.kappa, beta, n_nu);
    if (cert.t0 <= 0.0) cert.t0 = 1.0;  // c0 == 0: any t0 > 0 admissible
  }

  cert.m_hat0 = (1.0 - cert.kappa) * (cert.kappa + cert.c0 / cert.t0) /
                ((1.0 - 2.0 * cert.kappa) * n_nu);
  const double m_hat_bound = (1.0 - beta) / (3.0 + beta);
  const bool m_hat_ok = cert.m_hat0 >= 0.0 && cert.m_hat0 < m_hat_bound;
  if (cert.theoretical_mode && !m_hat_ok)
    throw InitializationError("init: m_hat0 out of range; increase t0");
  cert.preconditions_hold = kappa_ok && m_hat_ok;

  cert.delta = config.delta ? *config.delta : beta / 16.0;
  cert.c_beta = c_beta(beta, config.exact_variant);
  cert.sigma_beta = sigma_beta(cert.c_beta, nu);
  cert.zeta0 = e0.gradient + (problem.c + cert.xi0) / cert.t0;

  if (m_hat_ok && cert.m_hat0 < 0.5) {
    cert.gamma1 = (1.0 - cert.m_hat0) * beta / (1.0 - 2.0 * cert.m_hat0) +
                  cert.m_hat0 / (1.0 - cert.m_hat0);
    cert.gamma_hat0 = 0.43 * std::sqrt(beta) * (1.0 - cert.m_hat0) /
                          (1.0 - 2.0 * cert.m_hat0) +
                      cert.m_hat0 / (1.0 - cert.m_hat0);
  }
  if (m_hat_ok && cert.gamma_hat0 < 1.0 && cert.gamma_hat0 >= 0.0) {
    cert.psi = psi_beta(nu, cert.m_hat0, cert.gamma_hat0, cert.gamma1, cert.delta);
    cert.psi_from_formula = true;
  } else {
    cert.psi = nu;  // leading term; certificate flags record the fallback
    cert.psi_from_formula = false;
  }
  return cert;
}

struct PathState {
  VectorXd x;
  double t = 0.0;
  int k = 0;
};

// One path-following step: shrink t geometrically, then take a single
// inexact proximal-Newton step at the new t.
inline SubSolution step(PathState& state, const InitCertificate& cert,
                        const CompositeProblem& problem, bool exact_variant) {
  state.t *= (1.0 - cert.sigma_beta);
  const QuadraticModel model = build_model(problem.barrier, state.x, cert.zeta0, cert.eta,
                                           problem.c, state.t, problem.g);
  SubSolution sub;
  const ProxKind gk = problem.g.kind();
  if (exact_variant && (gk == ProxKind::Zero || gk == ProxKind::AffineDiag)) {
    sub.z = solve_affine_exact(model);
    sub.gap_bound = 0.0;
    sub.iters = 0;
  } else {
    sub = solve(model, cert.delta, cert.beta);
  }
  // Inside the theory the full step stays interior; out-of-theory manual
  // starts can overshoot the boundary, so pull back toward the anchor.
  if (!problem.barrier.evaluate(sub.z).interior()) {
    double s = 1.0;
    VectorXd z = sub.z;
    while (s > 1e-12 && !problem.barrier.evaluate(z).interior()) {
      s *= 0.5;
      z = state.x + s * (sub.z - state.x);
    }
    if (!problem.barrier.evaluate(z).interior())
      throw SubsolverFailure("step: iterate left the barrier domain", sub);
    sub.z = z;
  }
  state.x = sub.z;
  ++state.k;
  return sub;
}

inline SolveResult solve(const CompositeProblem& problem, const SolverConfig& config) {
  using clock = std::chrono::steady_clock;
  const InitCertificate cert = init(problem, config);

  SolveResult result;
  result.cert = cert;
  PathState state{cert.x0, cert.t0, 0};
  const int cap = std::min(config.max_iterations,
                           k_max_bound(cert.psi, cert.t0, config.epsilon, cert.sigma_beta));
  if (config.record_iterates) result.iterates.push_back(state.x);

  result.trace.status = SolveStatus::IterationCap;
  const auto start = clock::now();
  while (true) {
    if (state.t * cert.psi <= config.epsilon) {
      result.trace.status = SolveStatus::Converged;
      break;
    }
    if (state.k >= cap) {
      result.trace.status = SolveStatus::IterationCap;
      break;
    }
    try {
      const SubSolution sub = step(state, cert, problem, config.exact_variant);
      const double ms =
          std::chrono::duration<double, std::milli>(clock::now() - start).count();
      result.trace.records.push_back({state.k, state.t, problem.objective(state.x),
                                      sub.iters, sub.gap_bound, ms});
      if (config.record_iterates) result.iterates.push_back(state.x);
    } catch (const SubsolverFailure&) {
      result.trace.status = SolveStatus::SubsolverFailure;
      break;
    }
  }
  result.x = state.x;
  result.objective = problem.objective(result.x);
  return result;
}

}  // namespace ppf
