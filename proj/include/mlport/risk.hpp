#pragma once

// Population-level quantities. With x ~ N(mu, Sigma) and A = Sigma + mu mu',
// the generalisation error of a position theta is
//   F(theta) = E[(r_bar - x'theta)^2] = (r_bar - mu'theta)^2 + theta' Sigma theta,
// minimised by theta* = A^-1 mu r_bar, and F(theta) = F* + (theta*-theta)'A(theta*-theta).

#include "mlport/core.hpp"
#include "mlport/estimators/regression.hpp"
#include "mlport/parallel.hpp"
#include "mlport/sampling.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace mlport {

inline Eigen::VectorXd optimal_weights(const PopulationSpec& pop) {
  return pop.second_moment().ldlt().solve(pop.mu()) * pop.r_bar();
}

/// Tangency portfolio Sigma^-1 mu / (1' Sigma^-1 mu).
inline Eigen::VectorXd tangency_weights(const PopulationSpec& pop) {
  const Eigen::VectorXd raw = pop.sigma().ldlt().solve(pop.mu());
  if (!(std::abs(raw.sum()) > tol::kNormalization)) {
    throw Error(ErrorKind::DegenerateNormalization, "1' Sigma^-1 mu is numerically zero");
  }
  return raw / raw.sum();
}

inline double generalisation_error(const Eigen::VectorXd& theta, const PopulationSpec& pop) {
  if (theta.size() != pop.m()) throw Error(ErrorKind::InvalidArgument, "weight dimension does not match population");
  const double gap = pop.r_bar() - pop.mu().dot(theta);
  return gap * gap + theta.dot(pop.sigma() * theta);
}

/// F* = F(theta*).
inline double minimum_generalisation_error(const PopulationSpec& pop) {
  return generalisation_error(optimal_weights(pop), pop);
}

inline double population_sharpe(const Eigen::VectorXd& theta, const PopulationSpec& pop) {
  if (theta.size() != pop.m()) throw Error(ErrorKind::InvalidArgument, "weight dimension does not match population");
  const double variance = theta.dot(pop.sigma() * theta);
  if (!(variance > tol::kZeroVariance)) throw Error(ErrorKind::ZeroRiskPortfolio, "portfolio variance is numerically zero");
  return pop.mu().dot(theta) / std::sqrt(variance);
}

/// Monte-Carlo estimation risk of one strategy with its bias/variance split.
struct RiskReport {
  double risk = 0.0;
  double bias_sq = 0.0;
  double variance = 0.0;
  Eigen::VectorXd mean_weights;  // theta-bar
  Eigen::MatrixXd weight_cov;    // S, 1/(K-1) normalisation
};

inline RiskReport estimation_risk(const std::vector<Eigen::VectorXd>& samples, const PopulationSpec& pop) {
  if (samples.size() < 2) throw Error(ErrorKind::InsufficientSamples, "estimation risk needs at least two samples");
  const Eigen::Index m = pop.m();
  const auto k = static_cast<double>(samples.size());
  RiskReport out;
  out.mean_weights = Eigen::VectorXd::Zero(m);
  for (const auto& s : samples) {
    if (s.size() != m) throw Error(ErrorKind::InvalidArgument, "weight dimension does not match population");
    out.mean_weights += s;
  }
  out.mean_weights /= k;
  out.weight_cov = Eigen::MatrixXd::Zero(m, m);
  for (const auto& s : samples) {
    const Eigen::VectorXd dev = s - out.mean_weights;
    out.weight_cov.noalias() += dev * dev.transpose();
  }
  out.weight_cov /= (k - 1.0);
  const Eigen::MatrixXd a = pop.second_moment();
  const Eigen::VectorXd bias = optimal_weights(pop) - out.mean_weights;
  out.bias_sq = bias.dot(a * bias);
  out.variance = (a * out.weight_cov).trace();
  out.risk = out.bias_sq + out.variance;
  return out;
}

inline RiskReport estimation_risk(const std::vector<WeightVector>& samples, const PopulationSpec& pop) {
  std::vector<Eigen::VectorXd> raw;
  raw.reserve(samples.size());
  for (const auto& w : samples) raw.push_back(w.theta);
  return estimation_risk(raw, pop);
}

/// Upper end of the ridge penalties that beat OLS: 2 F* / ||theta*||^2 (+inf when theta* = 0).
inline double ridge_dominance_bound(const PopulationSpec& pop) {
  const Eigen::VectorXd star = optimal_weights(pop);
  const double norm_sq = star.squaredNorm();
  if (norm_sq == 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 * generalisation_error(star, pop) / norm_sq;
}

/// Ridge estimation risk across a penalty grid. Every penalty is fitted on
/// the same K training sets, dataset k drawn with seed derive_seed(seed, {k}).
inline std::vector<RiskReport> bias_variance_curve(const PopulationSpec& pop, Eigen::Index n,
                                                   const std::vector<double>& lambdas, int replications,
                                                   std::uint64_t seed, std::size_t threads = 0) {
  if (replications < 2) throw Error(ErrorKind::InsufficientSamples, "bias/variance curve needs K >= 2");
  for (double l : lambdas) PenaltySpec{PenaltyKind::ridge, l}.validate(pop.m());
  const auto k = static_cast<std::size_t>(replications);
  // fits[r][i]: replication r, penalty i
  std::vector<std::vector<Eigen::VectorXd>> fits(k);
  parallel_for(k, threads, [&](std::size_t r) {
    const Eigen::MatrixXd x = sample_returns_matrix(pop, n, derive_seed(seed, {r}));
    const RegressionDesign d = RegressionDesign::from_returns(x, pop.r_bar());
    const RidgePath path(d);
    auto& row = fits[r];
    row.reserve(lambdas.size());
    for (double l : lambdas) row.push_back(path.solve(l));
  });
  std::vector<RiskReport> out;
  out.reserve(lambdas.size());
  std::vector<Eigen::VectorXd> column(k);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    for (std::size_t r = 0; r < k; ++r) column[r] = fits[r][i];
    out.push_back(estimation_risk(column, pop));
  }
  return out;
}

}  // namespace mlport
