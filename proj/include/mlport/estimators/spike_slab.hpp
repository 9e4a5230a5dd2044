#pragma once

// Spike-and-Slab portfolio selection by Gibbs sampling.
//
// Model: r_bar * 1 = X_eta theta_eta + e,  e ~ N(0, phi^2 I), with
//   eta_j ~ Bernoulli(pi_j),
//   theta_eta | phi^2, eta ~ N(0, phi^2 V0),  V0^-1 = (g/n) X_eta'X_eta  (Zellner),
//   phi^2 | eta ~ InvGamma(a0, b0).
// Each sweep visits the assets in a fresh random order and resamples eta_j
// from its full conditional (theta and phi^2 integrated out), then draws
// phi^2 and theta_eta from their conditional posteriors.

#include "mlport/estimators/regression.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

namespace mlport {

struct SpikeSlabConfig {
  double g = 1.0;
  double a0 = 0.1;
  double b0 = 0.1;
  std::vector<double> pi;  // empty means 0.5 for every asset
  int n_iter = 10000;      // retained draws
  int n_burn = 5000;       // discarded draws before those
  std::uint64_t seed = 0;

  double inclusion_prior(Eigen::Index j) const { return pi.empty() ? 0.5 : pi[static_cast<std::size_t>(j)]; }

  void validate(Eigen::Index m) const {
    if (!(g > 0.0) || !(a0 > 0.0) || !(b0 > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "g, a0 and b0 must be positive");
    }
    if (!pi.empty()) {
      if (static_cast<Eigen::Index>(pi.size()) != m) {
        throw Error(ErrorKind::InvalidArgument, "inclusion prior length does not match asset count");
      }
      for (double p : pi) {
        if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "inclusion probabilities must lie in [0,1]");
      }
    }
    if (n_iter < 1) throw Error(ErrorKind::InvalidArgument, "n_iter must be positive");
    if (n_burn < 0 || n_burn >= n_iter) throw Error(ErrorKind::InvalidArgument, "n_burn must be in [0, n_iter)");
  }
};

struct SpikeSlabPosterior {
  Eigen::VectorXd inclusion_freq;  // fraction of retained draws with eta_j = 1
  Eigen::MatrixXd theta_draws;     // n_iter x m, excluded assets are exact zeros
  Eigen::VectorXd sigma2_draws;    // phi^2 per retained draw
  WeightVector point_estimate;     // column means of theta_draws
  long singular_rejections = 0;    // proposals to singular submodels
};

/// Conditional posterior of (theta_eta, phi^2) for one inclusion vector.
struct SubmodelPosterior {
  std::vector<Eigen::Index> members;
  Eigen::VectorXd mean;        // theta^1_eta
  Eigen::MatrixXd precision_factor;  // lower Cholesky factor L of (V^1)^-1
  double a1 = 0.0;
  double b1 = 0.0;
  double log_evidence = 0.0;  // log p(y | eta)
  double log_marginal = 0.0;  // log p(eta | y) up to a constant shared by all eta
};

namespace detail {

inline double log_prior_inclusion(const std::vector<char>& eta, const SpikeSlabConfig& cfg) {
  double out = 0.0;
  for (std::size_t j = 0; j < eta.size(); ++j) {
    const double p = cfg.inclusion_prior(static_cast<Eigen::Index>(j));
    out += eta[j] ? std::log(p) : std::log1p(-p);
  }
  return out;
}

}  // namespace detail

/// Posterior quantities for inclusion vector `eta`; empty when X_eta'X_eta is singular.
inline std::optional<SubmodelPosterior> submodel_posterior(const RegressionDesign& d, const std::vector<char>& eta,
                                                           const SpikeSlabConfig& cfg) {
  constexpr double kLogTwoPi = 1.8378770664093454836;
  const double n = static_cast<double>(d.n);
  SubmodelPosterior post;
  for (std::size_t j = 0; j < eta.size(); ++j) {
    if (eta[j]) post.members.push_back(static_cast<Eigen::Index>(j));
  }
  const auto k = static_cast<Eigen::Index>(post.members.size());
  post.a1 = cfg.a0 + 0.5 * n;

  double log_det_ratio = 0.0;  // log|V1| - log|V0|
  double quad_prior = 0.0;     // theta0' V0^-1 theta0 (theta0 = 0)
  double quad_post = 0.0;      // theta1' V1^-1 theta1
  if (k > 0) {
    Eigen::MatrixXd gram_eta(k, k);
    Eigen::VectorXd xty_eta(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      xty_eta(a) = d.xty(post.members[a]);
      for (Eigen::Index b = 0; b < k; ++b) gram_eta(a, b) = d.gram(post.members[a], post.members[b]);
    }
    const Eigen::MatrixXd prior_precision = (cfg.g / n) * gram_eta;
    Eigen::LLT<Eigen::MatrixXd> prior_llt(prior_precision);
    if (prior_llt.info() != Eigen::Success) return std::nullopt;
    const Eigen::MatrixXd post_precision = gram_eta + prior_precision;
    Eigen::LLT<Eigen::MatrixXd> post_llt(post_precision);
    if (post_llt.info() != Eigen::Success) return std::nullopt;
    const Eigen::MatrixXd l0 = prior_llt.matrixL();
    post.precision_factor = post_llt.matrixL();
    if (!(l0.diagonal().minCoeff() > 0.0) || !(post.precision_factor.diagonal().minCoeff() > 0.0)) return std::nullopt;
    // Relative pivot check: Cholesky can succeed on numerically singular input.
    const double pivot_ratio = l0.diagonal().minCoeff() / l0.diagonal().maxCoeff();
    if (!(pivot_ratio * pivot_ratio > 1.0 / tol::kConditionLimit)) return std::nullopt;
    log_det_ratio = 2.0 * (l0.diagonal().array().log().sum() - post.precision_factor.diagonal().array().log().sum());
    post.mean = post_llt.solve(xty_eta);  // V1 (X'y + V0^-1 theta0), theta0 = 0
    quad_post = post.mean.dot(post_precision * post.mean);
  } else {
    post.mean.resize(0);
    post.precision_factor.resize(0, 0);
  }
  post.b1 = cfg.b0 + 0.5 * (d.yty() + quad_prior - quad_post);
  if (!(post.b1 > 0.0)) return std::nullopt;

  post.log_evidence = -0.5 * n * kLogTwoPi + 0.5 * log_det_ratio + std::lgamma(post.a1) - std::lgamma(cfg.a0) +
                      cfg.a0 * std::log(cfg.b0) - post.a1 * std::log(post.b1);
  post.log_marginal = post.log_evidence + detail::log_prior_inclusion(eta, cfg);
  return post;
}

/// log p(eta | y) up to an eta-independent constant; empty for singular submodels.
inline std::optional<double> log_model_posterior(const RegressionDesign& d, const std::vector<char>& eta,
                                                 const SpikeSlabConfig& cfg) {
  auto post = submodel_posterior(d, eta, cfg);
  if (!post) return std::nullopt;
  return post->log_marginal;
}

namespace detail {

/// P(eta_j = 1 | rest) from the evidence of both states and the prior pi_j.
/// Only pi_j enters, so a zero prior elsewhere cannot freeze the chain.
inline double inclusion_probability(double log_evidence_in, double log_evidence_out, double pi_j) {
  if (pi_j <= 0.0) return 0.0;
  if (pi_j >= 1.0) return 1.0;
  const double log_odds = log_evidence_in - log_evidence_out + std::log(pi_j) - std::log1p(-pi_j);
  return 1.0 / (1.0 + std::exp(-log_odds));
}

}  // namespace detail

inline SpikeSlabPosterior spike_slab_sample(const RegressionDesign& d, const SpikeSlabConfig& cfg,
                                            const std::vector<std::string>& labels = {}) {
  const Eigen::Index m = d.m();
  cfg.validate(m);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  SpikeSlabPosterior out;
  out.theta_draws = Eigen::MatrixXd::Zero(cfg.n_iter, m);
  out.sigma2_draws = Eigen::VectorXd::Zero(cfg.n_iter);
  out.inclusion_freq = Eigen::VectorXd::Zero(m);

  std::vector<char> eta(static_cast<std::size_t>(m), 1);
  std::optional<SubmodelPosterior> current = submodel_posterior(d, eta, cfg);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(m);

  const int total = cfg.n_burn + cfg.n_iter;
  for (int it = 0; it < total; ++it) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index j : order) {
      auto& slot = eta[static_cast<std::size_t>(j)];
      const char was = slot;
      slot = static_cast<char>(!was);
      std::optional<SubmodelPosterior> flipped = submodel_posterior(d, eta, cfg);
      if (!flipped) {
        ++out.singular_rejections;
        if (!current) {
          // Neither state is identifiable: move toward the smaller model.
          slot = 0;
          if (was == 0) continue;
          current = std::move(flipped);
        } else {
          slot = was;
        }
        continue;
      }
      if (!current) {
        current = std::move(flipped);
        continue;
      }
      const double log_in = was ? current->log_evidence : flipped->log_evidence;
      const double log_out = was ? flipped->log_evidence : current->log_evidence;
      const double p = detail::inclusion_probability(log_in, log_out, cfg.inclusion_prior(j));
      const char next = static_cast<char>(uniform(rng) < p);
      slot = next;
      if (next != was) current = std::move(flipped);
    }

    const int kept = it - cfg.n_burn;
    double phi2 = 0.0;
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(m);
    if (current) {
      std::gamma_distribution<double> gamma(current->a1, 1.0 / current->b1);
      phi2 = 1.0 / gamma(rng);
      const auto k = static_cast<Eigen::Index>(current->members.size());
      if (k > 0) {
        Eigen::VectorXd z(k);
        for (Eigen::Index a = 0; a < k; ++a) z(a) = normal(rng);
        // theta ~ N(mean, phi2 V1) with V1^-1 = L L'  =>  mean + sqrt(phi2) L'^-1 z.
        const Eigen::VectorXd noise =
            current->precision_factor.transpose().triangularView<Eigen::Upper>().solve(z) * std::sqrt(phi2);
        for (Eigen::Index a = 0; a < k; ++a) theta(current->members[a]) = current->mean(a) + noise(a);
      }
    } else {
      // Still singular after a full sweep: record the empty portfolio.
      ++out.singular_rejections;
      const double b1 = cfg.b0 + 0.5 * d.yty();
      std::gamma_distribution<double> gamma(cfg.a0 + 0.5 * static_cast<double>(d.n), 1.0 / b1);
      phi2 = 1.0 / gamma(rng);
    }
    if (kept >= 0) {
      out.theta_draws.row(kept) = theta.transpose();
      out.sigma2_draws(kept) = phi2;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (eta[static_cast<std::size_t>(j)]) counts(j) += 1.0;
      }
    }
  }

  out.inclusion_freq = counts / static_cast<double>(cfg.n_iter);
  out.point_estimate.theta = out.theta_draws.colwise().mean().transpose();
  out.point_estimate.labels = labels.empty() ? detail::numbered_labels("A", m, 1) : labels;
  return out;
}

inline SpikeSlabPosterior estimate_spike_slab(const ReturnsMatrix& returns, double r_bar, const SpikeSlabConfig& cfg) {
  return spike_slab_sample(RegressionDesign::from_returns(returns.data(), r_bar), cfg, returns.asset_labels());
}

}  // namespace mlport
