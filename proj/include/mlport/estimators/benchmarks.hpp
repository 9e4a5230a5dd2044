#pragma once

// Benchmark strategies: equal weights, minimum variance, mean-variance with
// a short-sale restriction, and Jorion-style empirical Bayes.

#include "mlport/estimators/lasso.hpp"
#include "mlport/estimators/regression.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace mlport {

inline Eigen::VectorXd equal_weights(Eigen::Index m, double gross = 1.0) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "equal weights need m >= 1");
  return Eigen::VectorXd::Constant(m, gross / static_cast<double>(m));
}

inline WeightVector estimate_equal_weights(Eigen::Index m, double gross = 1.0) {
  return WeightVector{equal_weights(m, gross), detail::numbered_labels("A", m, 1)};
}

namespace detail {

inline void require_invertible_cov(const SampleMoments& mom) {
  const Eigen::Index m = mom.mean.size();
  if (m > mom.n_obs - 1) {
    throw Error(ErrorKind::DegenerateMoments, "sample covariance is singular: m > n - 1");
  }
  if (!(linalg::condition_number(mom.cov) < tol::kConditionLimit)) {
    throw Error(ErrorKind::DegenerateMoments, "sample covariance is singular or ill-conditioned");
  }
}

}  // namespace detail

/// omega = Sigma^-1 1 / (1' Sigma^-1 1), relative weights summing to one.
inline Eigen::VectorXd min_variance_weights(const SampleMoments& mom) {
  detail::require_invertible_cov(mom);
  const Eigen::VectorXd raw = mom.cov.ldlt().solve(Eigen::VectorXd::Ones(mom.mean.size()));
  return raw / raw.sum();
}

inline WeightVector estimate_min_variance(const ReturnsMatrix& returns) {
  return detail::labelled(min_variance_weights(compute_moments(returns)), returns);
}

/// Largest KKT violation of  min (1/n)||y - X theta||^2  s.t. theta >= 0,
/// measured on the gradient (2/n)(X'X theta - X'y).
inline double nonneg_kkt_residual(const RegressionDesign& d, const Eigen::VectorXd& theta) {
  const Eigen::VectorXd grad = (2.0 / static_cast<double>(d.n)) * (d.gram * theta - d.xty);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    worst = std::max(worst, std::max(0.0, -theta(j)));
    worst = std::max(worst, std::max(0.0, -grad(j)));
    if (theta(j) > 0.0) worst = std::max(worst, std::abs(grad(j)));
  }
  return worst;
}

namespace detail {

inline std::optional<Eigen::VectorXd> nonneg_polish(const RegressionDesign& d, const Eigen::VectorXd& theta) {
  std::vector<Eigen::Index> free;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    if (theta(j) > 0.0) free.push_back(j);
  }
  if (free.empty()) return std::nullopt;
  const auto k = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd g(k, k);
  Eigen::VectorXd rhs(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    rhs(a) = d.xty(free[a]);
    for (Eigen::Index b = 0; b < k; ++b) g(a, b) = d.gram(free[a], free[b]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd sub = llt.solve(rhs);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(theta.size());
  for (Eigen::Index a = 0; a < k; ++a) {
    if (!(sub(a) > 0.0)) return std::nullopt;
    out(free[a]) = sub(a);
  }
  if (nonneg_kkt_residual(d, out) > 1e-11) return std::nullopt;
  return out;
}

}  // namespace detail

/// Mean-variance weights under theta >= 0 by projected coordinate descent.
inline Eigen::VectorXd mv_noshort_weights(const RegressionDesign& d, const LassoOptions& opts = {}) {
  const Eigen::Index m = d.m();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd residual = d.xty;  // X'(y - X theta)
  std::vector<char> previous_free(static_cast<std::size_t>(m), 0);

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double gjj = d.gram(j, j);
      const double old = theta(j);
      const double updated = gjj > 0.0 ? std::max(0.0, (residual(j) + gjj * old) / gjj) : 0.0;
      const double delta = updated - old;
      if (delta != 0.0) {
        theta(j) = updated;
        residual.noalias() -= d.gram.col(j) * delta;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < opts.tolerance) return theta;
    bool same = true;
    for (Eigen::Index j = 0; j < m; ++j) {
      const char f = theta(j) > 0.0;
      if (f != previous_free[static_cast<std::size_t>(j)]) {
        same = false;
        previous_free[static_cast<std::size_t>(j)] = f;
      }
    }
    if (same) {
      if (auto exact = detail::nonneg_polish(d, theta)) return *exact;
    }
  }
  throw Error(ErrorKind::NonConvergence,
              "short-sale constrained solver hit " + std::to_string(opts.max_sweeps) + " sweeps");
}

inline WeightVector estimate_mv_noshort(const ReturnsMatrix& returns, double r_bar) {
  return detail::labelled(mv_noshort_weights(RegressionDesign::from_returns(returns.data(), r_bar)), returns);
}

/// Shrinkage of the sample mean toward the minimum-variance grand mean.
struct EmpiricalBayesShrinkage {
  double grand_mean = 0.0;       // mu_g = 1'S^-1 mu / 1'S^-1 1
  double weight = 0.0;           // v in [0, 1]
  Eigen::VectorXd shrunk_mean;   // (1 - v) mu + v mu_g 1
};

inline EmpiricalBayesShrinkage empirical_bayes_shrinkage(const SampleMoments& mom,
                                                         std::optional<double> weight_override = std::nullopt) {
  const Eigen::Index m = mom.mean.size();
  if (mom.n_obs <= m + 2) throw Error(ErrorKind::DegenerateMoments, "empirical Bayes needs n > m + 2");
  detail::require_invertible_cov(mom);
  const auto ldlt = mom.cov.ldlt();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
  const Eigen::VectorXd inv_ones = ldlt.solve(ones);
  EmpiricalBayesShrinkage out;
  out.grand_mean = inv_ones.dot(mom.mean) / inv_ones.sum();
  const Eigen::VectorXd gap = mom.mean - out.grand_mean * ones;
  const double dispersion = gap.dot(ldlt.solve(gap));
  const double mp2 = static_cast<double>(m + 2);
  out.weight = weight_override ? *weight_override : mp2 / (mp2 + static_cast<double>(mom.n_obs) * dispersion);
  out.shrunk_mean = (1.0 - out.weight) * mom.mean + out.weight * out.grand_mean * ones;
  return out;
}

/// Traditional formula with the shrunk mean: (S + mu_bar mu_bar')^-1 mu_bar r_bar.
inline Eigen::VectorXd empirical_bayes_weights(const SampleMoments& mom, double r_bar,
                                               std::optional<double> weight_override = std::nullopt) {
  const auto shrink = empirical_bayes_shrinkage(mom, weight_override);
  const Eigen::MatrixXd second = mom.cov + shrink.shrunk_mean * shrink.shrunk_mean.transpose();
  return second.ldlt().solve(shrink.shrunk_mean) * r_bar;
}

inline WeightVector estimate_empirical_bayes(const ReturnsMatrix& returns, double r_bar) {
  if (!(r_bar > 0.0)) throw Error(ErrorKind::InvalidArgument, "r_bar must be positive");
  return detail::labelled(empirical_bayes_weights(compute_moments(returns), r_bar), returns);
}

}  // namespace mlport
