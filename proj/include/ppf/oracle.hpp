#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ppf/pathfollow.hpp"
#include "ppf/problems.hpp"
#include "ppf/subsolver.hpp"

// High-accuracy reference solutions used by tests: central points of the
// re-parameterized barrier problem at fixed t, and local-metric distances.

namespace ppf::oracle {

// Damped proximal-Newton iterations on (1/t)(<c,x> + g(x)) + f(x) - eta<zeta0,x>
// until the proximal-Newton decrement drops below tol; damped steps
// 1/(1 + decrement) far from the solution, full steps near it.
inline VectorXd solve_central_point(const CompositeProblem& problem, const VectorXd& zeta0,
                                    double eta, double t, double tol,
                                    const VectorXd& x_start, int max_iters = 500) {
  const Barrier& b = problem.barrier;
  const ProxKind gk = problem.g.kind();
  const bool closed_form = (gk == ProxKind::Zero || gk == ProxKind::AffineDiag);
  VectorXd x = x_start;
  for (int it = 0; it < max_iters; ++it) {
    const QuadraticModel model =
        build_model(b, x, zeta0, eta, problem.c, t, problem.g);
    VectorXd z;
    if (closed_form) {
      z = solve_affine_exact(model);
    } else {
      z = solve(model, std::min(tol, 1e-7)).z;
    }
    const VectorXd d = z - x;
    const double decrement = model.metric.local_norm(d);
    if (decrement <= tol) return z;

    double step = decrement > 0.25 ? 1.0 / (1.0 + decrement) : 1.0;
    VectorXd x_next = x + step * d;
    // Back off if a full step overshoots the domain.
    for (int half = 0; half < 60 && !b.evaluate(x_next).interior(); ++half) {
      step *= 0.5;
      x_next = x + step * d;
    }
    if (!b.evaluate(x_next).interior())
      throw std::runtime_error("oracle: step left the barrier domain");
    x = x_next;
  }
  throw std::runtime_error("oracle: no convergence within the iteration cap");
}

// ||x - x_ref|| in the barrier metric anchored at x_ref.
inline double lambda_distance(const VectorXd& x, const VectorXd& x_ref, const Barrier& b) {
  return b.metric_at(x_ref).local_norm(x - x_ref);
}

}  // namespace ppf::oracle
