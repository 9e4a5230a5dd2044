#pragma once

// Lasso on the (1/n)-normalised objective
//   (1/n) ||y - X theta||^2 + lambda ||theta||_1
// by cyclic coordinate descent with soft thresholding. Once the active set
// stops changing, the stationarity system restricted to it is solved
// directly and accepted if it certifies the KKT conditions.

#include "mlport/estimators/regression.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mlport {

struct LassoOptions {
  double tolerance = 1e-10;     // max absolute coefficient change per sweep
  int max_sweeps = 100000;
};

/// Smallest lambda whose solution is identically zero: max_j |(2/n)(X'y)_j|.
inline double lasso_lambda_max(const RegressionDesign& d) {
  return 2.0 * d.xty.cwiseAbs().maxCoeff() / static_cast<double>(d.n);
}

/// Largest violation of the lasso subgradient conditions in (2/n) units.
inline double lasso_kkt_residual(const RegressionDesign& d, const Eigen::VectorXd& theta, double lambda) {
  const Eigen::VectorXd grad = (2.0 / static_cast<double>(d.n)) * (d.xty - d.gram * theta);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const double v = theta(j) == 0.0 ? std::max(0.0, std::abs(grad(j)) - lambda)
                                     : std::abs(grad(j) - std::copysign(lambda, theta(j)));
    worst = std::max(worst, v);
  }
  return worst;
}

namespace detail {

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

inline bool same_support(const Eigen::VectorXd& a, const std::vector<int>& signs) {
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const int s = a(j) > 0.0 ? 1 : (a(j) < 0.0 ? -1 : 0);
    if (s != signs[static_cast<std::size_t>(j)]) return false;
  }
  return true;
}

inline std::vector<int> support_signs(const Eigen::VectorXd& a) {
  std::vector<int> out(static_cast<std::size_t>(a.size()));
  for (Eigen::Index j = 0; j < a.size(); ++j) out[static_cast<std::size_t>(j)] = a(j) > 0.0 ? 1 : (a(j) < 0.0 ? -1 : 0);
  return out;
}

/// Solve the stationarity system on the current support; empty when it does
/// not certify optimality.
inline std::optional<Eigen::VectorXd> lasso_polish(const RegressionDesign& d, const std::vector<int>& signs,
                                                   double lambda) {
  std::vector<Eigen::Index> active;
  for (std::size_t j = 0; j < signs.size(); ++j) {
    if (signs[j] != 0) active.push_back(static_cast<Eigen::Index>(j));
  }
  if (active.empty()) return std::nullopt;
  const auto k = static_cast<Eigen::Index>(active.size());
  const double half_penalty = 0.5 * static_cast<double>(d.n) * lambda;
  Eigen::MatrixXd g(k, k);
  Eigen::VectorXd rhs(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    rhs(a) = d.xty(active[a]) - half_penalty * signs[static_cast<std::size_t>(active[a])];
    for (Eigen::Index b = 0; b < k; ++b) g(a, b) = d.gram(active[a], active[b]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd sub = llt.solve(rhs);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d.m());
  for (Eigen::Index a = 0; a < k; ++a) {
    const int s = signs[static_cast<std::size_t>(active[a])];
    if (sub(a) * s <= 0.0) return std::nullopt;
    theta(active[a]) = sub(a);
  }
  if (lasso_kkt_residual(d, theta, lambda) > 1e-11) return std::nullopt;
  return theta;
}

}  // namespace detail

/// Lasso weights. `warm_start`, when given, seeds the coordinate descent.
inline Eigen::VectorXd lasso_weights(const RegressionDesign& d, double lambda,
                                     const Eigen::VectorXd* warm_start = nullptr,
                                     const LassoOptions& opts = {}) {
  PenaltySpec{PenaltyKind::lasso, lambda}.validate(d.m());
  if (lambda == 0.0) {
    // Unpenalised: the minimiser is unique only for an identifiable design.
    detail::require_identifiable(d.m(), d.n, linalg::descending_eigen(d.gram).values);
  }
  const Eigen::Index m = d.m();
  Eigen::VectorXd theta = warm_start ? *warm_start : Eigen::VectorXd::Zero(m);
  if (lambda >= lasso_lambda_max(d)) return Eigen::VectorXd::Zero(m);

  const double threshold = 0.5 * static_cast<double>(d.n) * lambda;
  Eigen::VectorXd residual = d.xty - d.gram * theta;  // X'(y - X theta)
  std::vector<int> previous_signs = detail::support_signs(theta);

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double gjj = d.gram(j, j);
      const double old = theta(j);
      const double updated = gjj > 0.0 ? detail::soft_threshold(residual(j) + gjj * old, threshold) / gjj : 0.0;
      const double delta = updated - old;
      if (delta != 0.0) {
        theta(j) = updated;
        residual.noalias() -= d.gram.col(j) * delta;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < opts.tolerance) return theta;
    if (detail::same_support(theta, previous_signs)) {
      if (auto exact = detail::lasso_polish(d, previous_signs, lambda)) return *exact;
    } else {
      previous_signs = detail::support_signs(theta);
    }
  }
  throw Error(ErrorKind::NonConvergence,
              "lasso coordinate descent hit " + std::to_string(opts.max_sweeps) + " sweeps");
}

inline WeightVector estimate_lasso(const ReturnsMatrix& returns, double r_bar, double lambda) {
  return detail::labelled(lasso_weights(RegressionDesign::from_returns(returns.data(), r_bar), lambda), returns);
}

}  // namespace mlport
