#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ppf/sym.hpp"

namespace ppf {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Margin below which a point counts as on the boundary (value +inf).
inline constexpr double kBoundaryMargin = 1e-12;

struct ConditioningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Factorization of a barrier Hessian at a fixed interior anchor.  Supports
// quadratic forms, local/dual norms, Hessian-vector products, linear solves
// and deterministic extreme-eigenvalue estimation.
class MetricFactor {
 public:
  static MetricFactor diagonal(VectorXd d) {
    if ((d.array() <= 0.0).any())
      throw ConditioningError("metric: diagonal Hessian is not positive definite");
    MetricFactor m;
    m.diag_ = true;
    m.d_ = std::move(d);
    return m;
  }

  static MetricFactor dense(MatrixXd h) {
    MetricFactor m;
    m.diag_ = false;
    m.h_ = std::move(h);
    m.llt_.compute(m.h_);
    if (m.llt_.info() != Eigen::Success)
      throw ConditioningError("metric: Hessian is numerically singular");
    return m;
  }

  int dim() const { return diag_ ? static_cast<int>(d_.size()) : static_cast<int>(h_.rows()); }

  VectorXd apply(const VectorXd& u) const {
    check_dim(u);
    return diag_ ? VectorXd(d_.cwiseProduct(u)) : VectorXd(h_.selfadjointView<Eigen::Lower>() * u);
  }

  VectorXd solve(const VectorXd& v) const {
    check_dim(v);
    return diag_ ? VectorXd(v.cwiseQuotient(d_)) : VectorXd(llt_.solve(v));
  }

  double quadform(const VectorXd& u) const { return u.dot(apply(u)); }

  double local_norm(const VectorXd& u) const { return std::sqrt(std::max(0.0, quadform(u))); }

  double dual_norm(const VectorXd& v) const { return std::sqrt(std::max(0.0, v.dot(solve(v)))); }

  // Power method from the deterministic start (1,..,1)/sqrt(p); 200
  // iterations max, relative tolerance 1e-8.  Slightly inflated so the
  // returned value upper-bounds the true extreme.
  double largest_eigenvalue() const {
    return power_extreme([this](const VectorXd& u) { return apply(u); }) * (1.0 + 1e-4);
  }

  double smallest_eigenvalue() const {
    const double inv = power_extreme([this](const VectorXd& u) { return solve(u); });
    if (inv <= 0.0) throw ConditioningError("metric: power method failed on inverse");
    return (1.0 / inv) * (1.0 - 1e-4);
  }

 private:
  template <typename Op>
  double power_extreme(Op&& op) const {
    const int p = dim();
    VectorXd x = VectorXd::Constant(p, 1.0 / std::sqrt(static_cast<double>(p)));
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
      VectorXd y = op(x);
      const double r = x.dot(y);
      const double ny = y.norm();
      if (ny == 0.0) throw ConditioningError("metric: power method stagnated");
      x = y / ny;
      if (it > 0 && std::abs(r - lambda) <= 1e-8 * std::abs(r)) return r;
      lambda = r;
    }
    return lambda;
  }

  void check_dim(const VectorXd& u) const {
    if (static_cast<int>(u.size()) != dim())
      throw std::invalid_argument("metric: dimension mismatch");
  }

  bool diag_ = true;
  VectorXd d_;
  MatrixXd h_;
  Eigen::LLT<MatrixXd> llt_;
};

enum class BarrierKind { Box, NonnegOrthant, LogDet, MatrixInterval };

struct BarrierEval {
  double value = kInfinity;
  VectorXd gradient;  // undefined when value is +inf
  bool interior() const { return std::isfinite(value); }
};

// A nu-self-concordant barrier for one of the supported feasible sets.
// Immutable and shareable across threads.
class Barrier {
 public:
  static Barrier box(VectorXd lower, VectorXd upper) {
    if (lower.size() != upper.size() || lower.size() == 0)
      throw std::invalid_argument("barrier: box bounds have mismatched dimensions");
    if ((lower.array() >= upper.array()).any())
      throw std::invalid_argument("barrier: box requires l < u entrywise");
    Barrier b;
    b.kind_ = BarrierKind::Box;
    b.dim_ = static_cast<int>(lower.size());
    b.nu_ = 2.0 * b.dim_;
    b.log_homogeneous_ = false;
    b.lower_ = std::move(lower);
    b.upper_ = std::move(upper);
    return b;
  }

  static Barrier nonneg_orthant(int p) {
    Barrier b;
    b.kind_ = BarrierKind::NonnegOrthant;
    b.dim_ = p;
    b.nu_ = p;
    b.log_homogeneous_ = true;
    return b;
  }

  // -log det(X) on packed symmetric p x p matrices.
  static Barrier logdet(int p) {
    Barrier b;
    b.kind_ = BarrierKind::LogDet;
    b.matrix_dim_ = p;
    b.dim_ = packed_size(p);
    b.nu_ = p;
    b.log_homogeneous_ = true;
    return b;
  }

  // -log det(X) - log det(U - X) on packed symmetric matrices, 0 < X < U.
  static Barrier matrix_interval(MatrixXd upper) {
    const int p = static_cast<int>(upper.rows());
    if (upper.cols() != p) throw std::invalid_argument("barrier: interval bound must be square");
    Barrier b;
    b.kind_ = BarrierKind::MatrixInterval;
    b.matrix_dim_ = p;
    b.dim_ = packed_size(p);
    b.nu_ = 2.0 * p;
    b.log_homogeneous_ = false;
    b.interval_upper_ = std::move(upper);
    return b;
  }

  BarrierKind kind() const { return kind_; }
  int dim() const { return dim_; }  // flat (packed) dimension
  int matrix_dim() const { return matrix_dim_; }
  double nu() const { return nu_; }
  bool log_homogeneous() const { return log_homogeneous_; }
  double n_nu() const { return log_homogeneous_ ? 1.0 : nu_ + 2.0 * std::sqrt(nu_); }

  BarrierEval evaluate(const VectorXd& x) const {
    check_dim(x);
    BarrierEval out;
    switch (kind_) {
      case BarrierKind::Box: {
        const VectorXd hi = upper_ - x, lo = x - lower_;
        if ((hi.array() <= kBoundaryMargin).any() || (lo.array() <= kBoundaryMargin).any())
          return out;
        out.value = -(hi.array().log().sum() + lo.array().log().sum());
        out.gradient = hi.cwiseInverse() - lo.cwiseInverse();
        return out;
      }
      case BarrierKind::NonnegOrthant: {
        if ((x.array() <= kBoundaryMargin).any()) return out;
        out.value = -x.array().log().sum();
        out.gradient = -x.cwiseInverse();
        return out;
      }
      case BarrierKind::LogDet: {
        MatrixXd inv;
        double logdet_x;
        if (!spd_inverse(unpack_sym(x, matrix_dim_), inv, logdet_x)) return out;
        out.value = -logdet_x;
        out.gradient = pack_sym(-inv, 1e-9);
        return out;
      }
      case BarrierKind::MatrixInterval: {
        const MatrixXd X = unpack_sym(x, matrix_dim_);
        MatrixXd inv_x, inv_s;
        double ld_x, ld_s;
        if (!spd_inverse(X, inv_x, ld_x)) return out;
        if (!spd_inverse(interval_upper_ - X, inv_s, ld_s)) return out;
        out.value = -ld_x - ld_s;
        out.gradient = pack_sym(MatrixXd(inv_s - inv_x), 1e-9);
        return out;
      }
    }
    return out;
  }

  MetricFactor metric_at(const VectorXd& x) const {
    check_dim(x);
    switch (kind_) {
      case BarrierKind::Box: {
        const VectorXd hi = upper_ - x, lo = x - lower_;
        if ((hi.array() <= kBoundaryMargin).any() || (lo.array() <= kBoundaryMargin).any())
          throw std::domain_error("barrier: point is not interior");
        return MetricFactor::diagonal(hi.array().square().inverse().matrix() +
                                      lo.array().square().inverse().matrix());
      }
      case BarrierKind::NonnegOrthant: {
        if ((x.array() <= kBoundaryMargin).any())
          throw std::domain_error("barrier: point is not interior");
        return MetricFactor::diagonal(x.array().square().inverse().matrix());
      }
      case BarrierKind::LogDet: {
        MatrixXd inv;
        double ld;
        if (!spd_inverse(unpack_sym(x, matrix_dim_), inv, ld))
          throw std::domain_error("barrier: point is not interior");
        return MetricFactor::dense(packed_congruence_hessian({inv}));
      }
      case BarrierKind::MatrixInterval: {
        const MatrixXd X = unpack_sym(x, matrix_dim_);
        MatrixXd inv_x, inv_s;
        double ld;
        if (!spd_inverse(X, inv_x, ld) || !spd_inverse(interval_upper_ - X, inv_s, ld))
          throw std::domain_error("barrier: point is not interior");
        return MetricFactor::dense(packed_congruence_hessian({inv_x, inv_s}));
      }
    }
    throw std::logic_error("barrier: unknown kind");
  }

  // Closed-form analytic center when the set is bounded; absent otherwise.
  std::optional<VectorXd> analytic_center() const {
    switch (kind_) {
      case BarrierKind::Box:
        return VectorXd(0.5 * (lower_ + upper_));
      case BarrierKind::MatrixInterval:
        return pack_sym(MatrixXd(0.5 * interval_upper_));
      default:
        return std::nullopt;
    }
  }

  // Damped Newton iterations on f until the gradient's dual norm drops
  // below kappa_target.
  VectorXd newton_center(VectorXd x, double kappa_target, int max_iters = 200) const {
    if (kappa_target <= 0.0 || kappa_target >= 0.5)
      throw std::invalid_argument("newton_center: target must lie in (0, 1/2)");
    for (int it = 0; it < max_iters; ++it) {
      const BarrierEval e = evaluate(x);
      if (!e.interior()) throw std::domain_error("newton_center: iterate left the interior");
      const MetricFactor m = metric_at(x);
      const double decrement = m.dual_norm(e.gradient);
      if (decrement <= kappa_target) return x;
      x -= m.solve(e.gradient) / (1.0 + decrement);
    }
    throw std::runtime_error(
        "newton_center: no convergence (domain may be unbounded)");
  }

 private:
  void check_dim(const VectorXd& x) const {
    if (static_cast<int>(x.size()) != dim_)
      throw std::invalid_argument("barrier: dimension mismatch");
  }

  static bool spd_inverse(const MatrixXd& A, MatrixXd& inv, double& logdet) {
    Eigen::LLT<MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) return false;
    const VectorXd piv = llt.matrixL().toDenseMatrix().diagonal();
    if ((piv.array().square() <= kBoundaryMargin).any()) return false;
    logdet = 2.0 * piv.array().log().sum();
    inv = llt.solve(MatrixXd::Identity(A.rows(), A.cols()));
    return true;
  }

  // Dense packed-coordinate Hessian sum_k S_k (.) S_k for SPD factors S_k:
  // column j is pack(S * E_j * S) with E_j the j-th packed basis matrix.
  MatrixXd packed_congruence_hessian(const std::vector<MatrixXd>& factors) const {
    const int p = matrix_dim_, d = dim_;
    static const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
    MatrixXd H = MatrixXd::Zero(d, d);
    for (const MatrixXd& S : factors) {
      for (int j = 0, k = 0; j < p; ++j)
        for (int i = 0; i <= j; ++i, ++k) {
          MatrixXd col;
          if (i == j)
            col = S.col(i) * S.row(i);
          else
            col = kInvSqrt2 * (S.col(i) * S.row(j) + S.col(j) * S.row(i));
          H.col(k) += pack_sym(col, 1e-9);
        }
    }
    return H;
  }

  BarrierKind kind_ = BarrierKind::Box;
  int dim_ = 0;
  int matrix_dim_ = 0;
  double nu_ = 0.0;
  bool log_homogeneous_ = false;
  VectorXd lower_, upper_;
  MatrixXd interval_upper_;
};

}  // namespace ppf
