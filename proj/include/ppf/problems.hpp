#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>

#include "ppf/barrier.hpp"
#include "ppf/prox.hpp"
#include "ppf/sym.hpp"

namespace ppf {

// The composite template: minimize <c, x> + g(x) over the barrier's domain.
struct CompositeProblem {
  VectorXd c;
  ProxFn g;
  Barrier barrier;
  int ambient_dim = 0;
  std::optional<int> matrix_dim;
  std::optional<double> known_optimum;  // test metadata

  double objective(const VectorXd& x) const { return c.dot(x) + g.value(x); }
};

inline void validate_laplacian(const Eigen::MatrixXd& L, bool allow_negative_weights) {
  const int p = static_cast<int>(L.rows());
  if (L.cols() != p) throw std::invalid_argument("laplacian must be square");
  const double scale = std::max(1.0, L.cwiseAbs().maxCoeff());
  if ((L - L.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::invalid_argument("laplacian must be symmetric");
  if ((L.rowwise().sum().array().abs() > 1e-9 * scale).any())
    throw std::invalid_argument("laplacian rows must sum to zero");
  if (!allow_negative_weights) {
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j)
        if (i != j && L(i, j) > 1e-12)
          throw std::invalid_argument(
              "laplacian has positive off-diagonal entries; negative edge weights "
              "require the explicit override");
  }
}

// Max-Cut SDP relaxation in minimization form:
//   minimize <pack(-L/4), x>  s.t. X PSD (barrier), diag(X) = e (indicator).
inline CompositeProblem maxcut(const Eigen::MatrixXd& L, bool allow_negative_weights = false) {
  validate_laplacian(L, allow_negative_weights);
  const int p = static_cast<int>(L.rows());
  CompositeProblem prob{pack_sym(MatrixXd(-0.25 * L), 1e-9), ProxFn::affine_diag(p),
                        Barrier::logdet(p), packed_size(p), p, std::nullopt};
  return prob;
}

// Max-k-Cut SDP relaxation: c = pack(-(k-1)/(2k) L), entrywise floor
// -1/(k-1) plus diag(X) = e in the indicator, PSD in the barrier.
inline CompositeProblem maxkcut(const Eigen::MatrixXd& L, int k,
                                bool allow_negative_weights = false) {
  if (k < 2) throw std::invalid_argument("maxkcut requires k >= 2");
  validate_laplacian(L, allow_negative_weights);
  const int p = static_cast<int>(L.rows());
  const double coeff = -static_cast<double>(k - 1) / (2.0 * k);
  CompositeProblem prob{pack_sym(MatrixXd(coeff * L), 1e-9), ProxFn::elliptope_k(p, k),
                        Barrier::logdet(p), packed_size(p), p, std::nullopt};
  return prob;
}

// Box-constrained LP: minimize <c, x> over [l, u]; g = 0.
inline CompositeProblem box_lp(VectorXd c, VectorXd lower, VectorXd upper) {
  const int p = static_cast<int>(c.size());
  if (lower.size() != p || upper.size() != p)
    throw std::invalid_argument("box_lp: dimension mismatch");
  if ((lower.array() >= upper.array()).any())
    throw std::invalid_argument("box_lp: requires l < u entrywise");
  double opt = 0.0;
  for (int i = 0; i < p; ++i) opt += std::min(c[i] * lower[i], c[i] * upper[i]);
  CompositeProblem prob{std::move(c), ProxFn::zero(p),
                        Barrier::box(std::move(lower), std::move(upper)), p, std::nullopt,
                        opt};
  return prob;
}

}  // namespace ppf
