#pragma once

// Least-squares view of portfolio choice: regress the constant ideal return
// r_bar on the asset returns. Everything here works on the sufficient
// statistics X'X and X'y, so cross-validation can reuse them per fold.

#include "mlport/core.hpp"

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <vector>

namespace mlport {

enum class PenaltyKind { none, ridge, lasso, pcr };

inline std::string_view penalty_name(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::none: return "none";
    case PenaltyKind::ridge: return "ridge";
    case PenaltyKind::lasso: return "lasso";
    case PenaltyKind::pcr: return "pcr";
  }
  return "none";
}

/// Penalty family and level. For pcr the level is the component count.
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::none;
  double lambda = 0.0;

  void validate(Eigen::Index m) const {
    switch (kind) {
      case PenaltyKind::none: return;
      case PenaltyKind::ridge:
      case PenaltyKind::lasso:
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
          throw Error(ErrorKind::InvalidArgument, "penalty must be a finite nonnegative number");
        }
        return;
      case PenaltyKind::pcr:
        if (lambda != std::floor(lambda) || lambda < 1.0 || lambda > static_cast<double>(m)) {
          throw Error(ErrorKind::InvalidArgument, "component count must be an integer in 1..m");
        }
        return;
    }
  }
};

/// Sufficient statistics of the regression r_bar * 1 = X theta + e.
struct RegressionDesign {
  Eigen::MatrixXd gram;  // X'X
  Eigen::VectorXd xty;   // X'1 * r_bar
  Eigen::Index n = 0;
  double r_bar = 1.0;

  Eigen::Index m() const noexcept { return gram.rows(); }
  double yty() const noexcept { return static_cast<double>(n) * r_bar * r_bar; }

  static RegressionDesign from_returns(const Eigen::MatrixXd& x, double r_bar) {
    if (!(r_bar > 0.0)) throw Error(ErrorKind::InvalidArgument, "r_bar must be positive");
    if (x.rows() < 1 || x.cols() < 1) throw Error(ErrorKind::InvalidArgument, "empty returns matrix");
    RegressionDesign d;
    d.gram = x.transpose() * x;
    d.xty = x.colwise().sum().transpose() * r_bar;
    d.n = x.rows();
    d.r_bar = r_bar;
    return d;
  }
};

/// In-sample objective (1/n) sum_i (r_bar - x_i' theta)^2 from sufficient statistics.
inline double sample_objective(const RegressionDesign& d, const Eigen::VectorXd& theta) {
  return (d.yty() - 2.0 * theta.dot(d.xty) + theta.dot(d.gram * theta)) / static_cast<double>(d.n);
}

/// Mean squared deviation from r_bar realised on the rows of x.
inline double holdout_error(const Eigen::MatrixXd& x, double r_bar, const Eigen::VectorXd& theta) {
  return (Eigen::VectorXd::Constant(x.rows(), r_bar) - x * theta).squaredNorm() / static_cast<double>(x.rows());
}

namespace detail {

inline void require_identifiable(Eigen::Index m, Eigen::Index n, const Eigen::VectorXd& descending_values) {
  if (m > n) {
    throw Error(ErrorKind::DegenerateMoments,
                "more assets (" + std::to_string(m) + ") than observations (" + std::to_string(n) + ")");
  }
  if (!(linalg::condition_number(descending_values) < tol::kConditionLimit)) {
    throw Error(ErrorKind::DegenerateMoments, "X'X is singular or ill-conditioned");
  }
}

inline WeightVector labelled(Eigen::VectorXd theta, const ReturnsMatrix& returns) {
  return WeightVector{std::move(theta), returns.asset_labels()};
}

}  // namespace detail

/// Traditional (plug-in Markowitz) weights: theta = (X'X)^-1 X'y.
inline Eigen::VectorXd ols_weights(const RegressionDesign& d) {
  detail::require_identifiable(d.m(), d.n, linalg::descending_eigen(d.gram).values);
  return d.gram.ldlt().solve(d.xty);
}

inline WeightVector estimate_ols(const ReturnsMatrix& returns, double r_bar) {
  return detail::labelled(ols_weights(RegressionDesign::from_returns(returns.data(), r_bar)), returns);
}

/// Ridge weights theta = (X'X + lambda I)^-1 X'y; lambda = 0 is OLS.
inline Eigen::VectorXd ridge_weights(const RegressionDesign& d, double lambda) {
  PenaltySpec{PenaltyKind::ridge, lambda}.validate(d.m());
  if (lambda == 0.0) return ols_weights(d);
  Eigen::MatrixXd shifted = d.gram;
  shifted.diagonal().array() += lambda;
  return shifted.llt().solve(d.xty);
}

inline WeightVector estimate_ridge(const ReturnsMatrix& returns, double r_bar, double lambda) {
  return detail::labelled(ridge_weights(RegressionDesign::from_returns(returns.data(), r_bar), lambda), returns);
}

/// Ridge solutions for many penalties from one eigendecomposition of X'X.
class RidgePath {
 public:
  explicit RidgePath(const RegressionDesign& d) : m_(d.m()), n_(d.n), eig_(linalg::descending_eigen(d.gram)) {
    projected_ = eig_.vectors.transpose() * d.xty;
  }

  Eigen::VectorXd solve(double lambda) const {
    if (lambda == 0.0) detail::require_identifiable(m_, n_, eig_.values);
    const Eigen::VectorXd scaled = projected_.array() / (eig_.values.array() + lambda);
    return eig_.vectors * scaled;
  }

 private:
  Eigen::Index m_;
  Eigen::Index n_;
  linalg::SymmetricEigen eig_;
  Eigen::VectorXd projected_;
};

}  // namespace mlport
