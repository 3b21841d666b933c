#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "ppf/barrier.hpp"
#include "ppf/sym.hpp"

namespace ppf {

// Constraint-residual tolerance used by indicator values.
inline constexpr double kIndicatorTol = 1e-9;

enum class ProxKind { Zero, L1, AffineDiag, ElliptopeK, Box };

// A proper closed convex nonsmooth term g with a scaled Euclidean proximity
// operator.  Indicator kinds project; the projection is tau-independent.
class ProxFn {
 public:
  static ProxFn zero(int dim) { return ProxFn(ProxKind::Zero, dim); }

  static ProxFn l1(int dim, double weight = 1.0) {
    if (weight < 0.0) throw std::invalid_argument("prox: l1 weight must be nonnegative");
    ProxFn g(ProxKind::L1, dim);
    g.weight_ = weight;
    return g;
  }

  // Indicator of {diag(X) = e} on packed symmetric p x p matrices.
  static ProxFn affine_diag(int matrix_dim) {
    ProxFn g(ProxKind::AffineDiag, packed_size(matrix_dim));
    g.matrix_dim_ = matrix_dim;
    return g;
  }

  // Indicator of {diag(X) = e, X >= -1/(k-1) entrywise}, packed.
  static ProxFn elliptope_k(int matrix_dim, int k) {
    if (k < 2) throw std::invalid_argument("prox: elliptope requires k >= 2");
    ProxFn g(ProxKind::ElliptopeK, packed_size(matrix_dim));
    g.matrix_dim_ = matrix_dim;
    g.k_ = k;
    return g;
  }

  static ProxFn box(VectorXd lower, VectorXd upper) {
    if (lower.size() != upper.size() || (lower.array() > upper.array()).any())
      throw std::invalid_argument("prox: invalid box bounds");
    ProxFn g(ProxKind::Box, static_cast<int>(lower.size()));
    g.lower_ = std::move(lower);
    g.upper_ = std::move(upper);
    return g;
  }

  ProxKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int matrix_dim() const { return matrix_dim_; }
  int k() const { return k_; }
  bool is_indicator() const { return kind_ != ProxKind::Zero && kind_ != ProxKind::L1; }

  double value(const VectorXd& x) const {
    check_dim(x);
    switch (kind_) {
      case ProxKind::Zero:
        return 0.0;
      case ProxKind::L1:
        return weight_ * x.lpNorm<1>();
      case ProxKind::AffineDiag:
        return diag_feasible(x) ? 0.0 : kInfinity;
      case ProxKind::ElliptopeK: {
        if (!diag_feasible(x)) return kInfinity;
        // Off-diagonal packed entries carry a sqrt(2) scale.
        const double floor_packed = -std::sqrt(2.0) / (k_ - 1);
        for (int j = 0, idx = 0; j < matrix_dim_; ++j)
          for (int i = 0; i <= j; ++i, ++idx)
            if (i != j && x[idx] < floor_packed - std::sqrt(2.0) * kIndicatorTol)
              return kInfinity;
        return 0.0;
      }
      case ProxKind::Box:
        if ((x.array() < lower_.array() - kIndicatorTol).any() ||
            (x.array() > upper_.array() + kIndicatorTol).any())
          return kInfinity;
        return 0.0;
    }
    return kInfinity;
  }

  // argmin_v { tau*g(v) + 1/2 ||v - u||^2 }.  For indicators the result is
  // the projection and does not depend on tau.
  VectorXd prox(double tau, const VectorXd& u) const {
    check_dim(u);
    if (tau <= 0.0) throw std::invalid_argument("prox: tau must be positive");
    switch (kind_) {
      case ProxKind::Zero:
        return u;
      case ProxKind::L1: {
        const double thr = tau * weight_;
        return u.unaryExpr([thr](double v) {
          return v > thr ? v - thr : (v < -thr ? v + thr : 0.0);
        });
      }
      case ProxKind::AffineDiag: {
        VectorXd v = u;
        for (int i = 0; i < matrix_dim_; ++i) v[packed_diag_index(i)] = 1.0;
        return v;
      }
      case ProxKind::ElliptopeK: {
        const double floor_packed = -std::sqrt(2.0) / (k_ - 1);
        VectorXd v = u.cwiseMax(floor_packed);
        for (int i = 0; i < matrix_dim_; ++i) v[packed_diag_index(i)] = 1.0;
        return v;
      }
      case ProxKind::Box:
        return u.cwiseMax(lower_).cwiseMin(upper_);
    }
    throw std::logic_error("prox: unknown kind");
  }

 private:
  ProxFn(ProxKind kind, int dim) : kind_(kind), dim_(dim) {
    if (dim <= 0) throw std::invalid_argument("prox: dimension must be positive");
  }

  bool diag_feasible(const VectorXd& x) const {
    for (int i = 0; i < matrix_dim_; ++i)
      if (std::abs(x[packed_diag_index(i)] - 1.0) > kIndicatorTol) return false;
    return true;
  }

  void check_dim(const VectorXd& x) const {
    if (static_cast<int>(x.size()) != dim_)
      throw std::invalid_argument("prox: dimension mismatch");
  }

  ProxKind kind_;
  int dim_;
  double weight_ = 1.0;
  int matrix_dim_ = 0;
  int k_ = 0;
  VectorXd lower_, upper_;
};

}  // namespace ppf
