#pragma once

#include "mlport/mlport.hpp"

#include <catch_amalgamated.hpp>

#include <random>

namespace testing {

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
  return out;
}

// Returns-like panel: modest positive drift plus noise, well conditioned when n >> m.
inline Eigen::MatrixXd random_returns(Eigen::Index n, Eigen::Index m, std::mt19937_64& rng) {
  Eigen::MatrixXd x = gaussian(n, m, rng, 0.05);
  std::uniform_real_distribution<double> drift(-0.01, 0.03);
  for (Eigen::Index j = 0; j < m; ++j) x.col(j).array() += drift(rng);
  return x;
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(1e-300, b.norm());
}

// Random population with a positive definite covariance.
inline mlport::PopulationSpec random_population(Eigen::Index m, std::mt19937_64& rng, double r_bar = 1.0) {
  const Eigen::MatrixXd f = gaussian(m, m, rng, 0.05);
  Eigen::MatrixXd sigma = f * f.transpose() + 0.0004 * Eigen::MatrixXd::Identity(m, m);
  sigma = 0.5 * (sigma + sigma.transpose());
  std::uniform_real_distribution<double> drift(0.0, 0.02);
  Eigen::VectorXd mu(m);
  for (Eigen::Index j = 0; j < m; ++j) mu(j) = drift(rng);
  return mlport::PopulationSpec(mu, sigma, r_bar);
}

template <typename Fn>
mlport::ErrorKind error_kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const mlport::Error& e) {
    return e.kind();
  }
  FAIL("expected an mlport::Error");
  return mlport::ErrorKind::InvalidArgument;
}

}  // namespace testing
