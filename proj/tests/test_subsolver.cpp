#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ppf/barrier.hpp"
#include "ppf/problems.hpp"
#include "ppf/subsolver.hpp"
#include "ppf/sym.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using ppf::Barrier;
using ppf::MetricFactor;
using ppf::ProxFn;
using ppf::QuadraticModel;

namespace {

VectorXd random_vector(int n, std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = gauss(rng);
  return v;
}

MetricFactor random_spd_metric(int n, std::mt19937& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = gauss(rng);
  return MetricFactor::dense(A * A.transpose() + 0.3 * MatrixXd::Identity(n, n));
}

// Plain proximal gradient, used as the high-accuracy reference.
VectorXd ista_oracle(const QuadraticModel& model, int iters) {
  const double L = ppf::spectrum_bounds(model.metric).L;
  const ProxFn& g = *model.nonsmooth;
  VectorXd x = g.prox(1.0, model.anchor);
  for (int j = 0; j < iters; ++j)
    x = g.prox(1.0 / (model.t * L), x - model.smooth_grad(x) / L);
  return x;
}

}  // namespace

TEST_CASE("build_model assembles the linear term") {
  const Barrier b = Barrier::box(VectorXd::Constant(2, -1.0), VectorXd::Constant(2, 1.0));
  const ProxFn g = ProxFn::zero(2);
  const VectorXd c = (VectorXd(2) << 1.0, -2.0).finished();
  const VectorXd x = (VectorXd(2) << 0.2, -0.1).finished();
  const VectorXd zeta0 = (VectorXd(2) << 5.0, 7.0).finished();
  const double t = 2.0;

  // eta = 0: zeta0 is ignored.
  const QuadraticModel m0 = ppf::build_model(b, x, zeta0, 0.0, c, t, g);
  const VectorXd expect0 = b.evaluate(x).gradient + c / t;
  CHECK((m0.smooth_linear - expect0).cwiseAbs().maxCoeff() < 1e-15);

  // Hand-assembled eta = 1 vector.
  const QuadraticModel m1 = ppf::build_model(b, x, zeta0, 1.0, c, t, g);
  const VectorXd expect1 = b.evaluate(x).gradient - zeta0 + c / t;
  CHECK((m1.smooth_linear - expect1).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(ppf::build_model(b, VectorXd::Constant(2, 2.0), zeta0, 1.0, c, t, g),
                  std::domain_error);
  CHECK_THROWS_AS(ppf::build_model(b, x, zeta0, 1.0, c, 0.0, g), std::invalid_argument);
}

TEST_CASE("stationary anchor gives a zero linear term") {
  const Barrier b = Barrier::box(VectorXd::Constant(2, -1.0), VectorXd::Constant(2, 1.0));
  const VectorXd x0 = (VectorXd(2) << 0.3, -0.4).finished();
  const VectorXd zeta0 = b.evaluate(x0).gradient;
  const ProxFn g = ProxFn::zero(2);  // must outlive the model, which keeps a pointer
  const QuadraticModel m = ppf::build_model(b, x0, zeta0, 1.0, VectorXd::Zero(2), 1.0, g);
  CHECK(m.smooth_linear.cwiseAbs().maxCoeff() < 1e-15);
  CHECK((ppf::solve_affine_exact(m) - x0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("spectrum bounds on simple metrics") {
  const Barrier b = Barrier::box(VectorXd::Constant(2, -1.0), VectorXd::Constant(2, 1.0));
  const auto s2 = ppf::spectrum_bounds(b.metric_at(VectorXd::Zero(2)));
  CHECK(s2.L == Catch::Approx(2.0).epsilon(0.01));
  CHECK(s2.mu == Catch::Approx(2.0).epsilon(0.01));

  const auto s1 = ppf::spectrum_bounds(MetricFactor::diagonal(VectorXd::Ones(3)));
  CHECK(s1.L == Catch::Approx(1.0).epsilon(0.001));
  CHECK(s1.mu == Catch::Approx(1.0).epsilon(0.001));

  const auto sd = ppf::spectrum_bounds(MetricFactor::diagonal((VectorXd(2) << 1, 100).finished()));
  CHECK(sd.L == Catch::Approx(100.0).epsilon(0.01));
  CHECK(sd.mu == Catch::Approx(1.0).epsilon(0.01));
  CHECK(sd.mu <= sd.L);
}

TEST_CASE("unconstrained quadratic is solved to its closed form") {
  const ProxFn g = ppf::ProxFn::zero(2);
  QuadraticModel m{VectorXd::Zero(2), MetricFactor::diagonal(VectorXd::Ones(2)),
                   (VectorXd(2) << 1.0, -1.0).finished(), &g, 1.0};
  const auto sol = ppf::solve(m, 1e-8);
  CHECK(sol.z[0] == Catch::Approx(-1.0).margin(1e-8));
  CHECK(sol.z[1] == Catch::Approx(1.0).margin(1e-8));
  CHECK(sol.gap_bound <= 0.5e-16);
}

TEST_CASE("l1 model with identity metric reaches the soft threshold in one step") {
  const ProxFn g = ProxFn::l1(2);
  const double t = 2.0;
  QuadraticModel m{(VectorXd(2) << 2.0, 0.1).finished(),
                   MetricFactor::diagonal(VectorXd::Ones(2)),
                   (VectorXd(2) << -1.0, 0.0).finished(), &g, t};
  const auto sol = ppf::solve(m, 1e-7);
  const VectorXd expect = g.prox(1.0 / t, m.anchor - m.smooth_linear);
  CHECK((sol.z - expect).cwiseAbs().maxCoeff() < 3e-7);
}

TEST_CASE("box-constrained models agree with a long proximal-gradient run") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 10;
    const ProxFn g = ProxFn::box(VectorXd::Constant(n, -0.7), VectorXd::Constant(n, 0.7));
    QuadraticModel m{random_vector(n, rng), random_spd_metric(n, rng),
                     random_vector(n, rng), &g, 1.0};
    const double delta = 1e-5;
    const auto sol = ppf::solve(m, delta);
    const VectorXd ref = ista_oracle(m, 100000);
    // Gap <= delta^2/2 plus 1-strong convexity in the metric bounds the
    // metric distance by delta.
    CHECK(m.metric.local_norm(sol.z - ref) <= delta * (1.0 + 1e-3) + 1e-9);
  }
}

TEST_CASE("certificate soundness and iteration complexity") {
  std::mt19937 rng(32);
  const double beta = 1.0 / 9.0;
  const double delta = beta / 16.0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 8;
    const ProxFn g = (trial % 2) ? ProxFn::l1(n, 0.4)
                                 : ProxFn::box(VectorXd::Constant(n, -1.0), VectorXd::Ones(n));
    QuadraticModel m{random_vector(n, rng), random_spd_metric(n, rng),
                     random_vector(n, rng), &g, 1.0};
    const auto sol = ppf::solve(m, delta, beta);
    REQUIRE(sol.gap_bound <= 0.5 * delta * delta);

    const VectorXd ref = ista_oracle(m, 100000);
    const double true_gap = m.objective(sol.z) - m.objective(ref);
    CHECK(true_gap <= sol.gap_bound + 1e-12);

    const auto spec = ppf::spectrum_bounds(m.metric);
    const int jmax = ppf::fista_iteration_bound(spec.L / spec.mu, beta, delta);
    CHECK(sol.iters <= 4 * jmax);
  }
}

TEST_CASE("exact affine solve matches the iterative solver") {
  // 2x2 Max-Cut style model at an interior anchor.
  Eigen::MatrixXd L(2, 2);
  L << 1, -1, -1, 1;
  const auto prob = ppf::maxcut(L);
  MatrixXd X(2, 2);
  X << 1.0, 0.2, 0.2, 1.0;
  const VectorXd x = ppf::pack_sym(X);
  const VectorXd zeta0 = prob.barrier.evaluate(x).gradient + prob.c / 0.5;
  const QuadraticModel m = ppf::build_model(prob.barrier, x, zeta0, 1.0, prob.c, 0.4, prob.g);

  const VectorXd exact = ppf::solve_affine_exact(m);
  const auto iterative = ppf::solve(m, 1e-8);
  CHECK((exact - iterative.z).cwiseAbs().maxCoeff() < 1e-6);

  // KKT residual: the smooth gradient must lie in the span of the diagonal
  // coordinates, and the diagonal constraint must hold exactly.
  const VectorXd grad = m.smooth_grad(exact);
  for (int i = 0; i < 2; ++i) CHECK(exact[ppf::packed_diag_index(i)] == 1.0);
  CHECK(std::abs(grad[ppf::packed_index(0, 1)]) < 1e-8);
}

TEST_CASE("exact affine solve with identity metric is a Euclidean projection") {
  const ProxFn g = ProxFn::affine_diag(2);
  QuadraticModel m{ppf::pack_sym(MatrixXd::Identity(2, 2)),
                   MetricFactor::diagonal(VectorXd::Ones(3)),
                   (VectorXd(3) << 0.3, -0.2, 0.6).finished(), &g, 1.0};
  const VectorXd z = ppf::solve_affine_exact(m);
  const VectorXd unconstrained = m.anchor - m.smooth_linear;
  // Projection onto diag = e keeps off-diagonals, pins the diagonal.
  CHECK(z[ppf::packed_diag_index(0)] == 1.0);
  CHECK(z[ppf::packed_diag_index(1)] == 1.0);
  CHECK(z[ppf::packed_index(0, 1)] == Catch::Approx(unconstrained[ppf::packed_index(0, 1)]));
}

TEST_CASE("subsolver failure carries the best iterate") {
  const ProxFn g = ProxFn::zero(2);
  QuadraticModel m{VectorXd::Zero(2),
                   MetricFactor::diagonal((VectorXd(2) << 1.0, 1e8).finished()),
                   (VectorXd(2) << 1.0, 1.0).finished(), &g, 1.0};
  try {
    // An absurdly tight delta forces the cap on an ill-conditioned model.
    ppf::solve(m, 1e-14);
  } catch (const ppf::SubsolverFailure& e) {
    CHECK(e.best.z.size() == 2);
    CHECK(e.best.gap_bound >= 0.0);
    return;
  }
  SUCCEED("converged anyway");
}
