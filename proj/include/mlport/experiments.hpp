#pragma once

// Monte-Carlo simulation study on a known population, the rolling-window
// backtest on observed returns, and the pairwise Sharpe-equality test.

#include "mlport/parallel.hpp"
#include "mlport/strategy.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mlport {

// ---------------------------------------------------------------------------
// Built-in population generator

enum class GeneratorMode { decay, equicorrelation };

struct GeneratorConfig {
  GeneratorMode mode = GeneratorMode::decay;
  Eigen::Index m = 50;
  std::uint64_t seed = 0;
  double r_bar = 1.0;
  double vol = 0.05;             // average per-asset volatility
  double decay = 1.0;            // eigenvalue i is proportional to i^-decay
  double mean_sparsity = 0.0;    // fraction of assets with zero expected return (decay mode)
  double mean_scale = 0.005;     // expected return scale before any Sharpe targeting
  double target_sharpe = 0.0;    // > 0 rescales mu so that sqrt(mu' Sigma^-1 mu) hits it
  double rho = 0.95;             // equicorrelation mode
  Eigen::Index nonzero_means = 3;  // equicorrelation mode: leading assets with nonzero mu

  void validate() const {
    if (m < 1) throw Error(ErrorKind::ConfigError, "generator needs m >= 1");
    if (!(vol > 0.0)) throw Error(ErrorKind::ConfigError, "generator volatility must be positive");
    if (!(decay >= 0.0)) throw Error(ErrorKind::ConfigError, "eigenvalue decay must be nonnegative");
    if (!(mean_sparsity >= 0.0 && mean_sparsity < 1.0)) throw Error(ErrorKind::ConfigError, "mean sparsity must lie in [0, 1)");
    if (!(rho > -1.0 / static_cast<double>(std::max<Eigen::Index>(m - 1, 1)) && rho < 1.0)) {
      throw Error(ErrorKind::ConfigError, "equicorrelation outside the positive definite range");
    }
    if (nonzero_means < 0 || nonzero_means > m) throw Error(ErrorKind::ConfigError, "nonzero_means out of range");
    if (target_sharpe < 0.0) throw Error(ErrorKind::ConfigError, "target Sharpe must be nonnegative");
  }
};

inline PopulationSpec generate_population(const GeneratorConfig& cfg) {
  cfg.validate();
  const Eigen::Index m = cfg.m;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.5, 1.5);
  Eigen::MatrixXd sigma(m, m);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);

  if (cfg.mode == GeneratorMode::equicorrelation) {
    const double var = cfg.vol * cfg.vol;
    sigma.setConstant(cfg.rho * var);
    sigma.diagonal().setConstant(var);
    for (Eigen::Index j = 0; j < cfg.nonzero_means; ++j) {
      mu(j) = cfg.mean_scale * static_cast<double>(cfg.nonzero_means - j) / static_cast<double>(cfg.nonzero_means);
    }
  } else {
    // First basis direction is the equally weighted "market"; the rest are random.
    Eigen::MatrixXd raw(m, m);
    raw.col(0).setOnes();
    for (Eigen::Index c = 1; c < m; ++c)
      for (Eigen::Index r = 0; r < m; ++r) raw(r, c) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd ev(m);
    for (Eigen::Index i = 0; i < m; ++i) ev(i) = std::pow(static_cast<double>(i + 1), -cfg.decay);
    ev *= static_cast<double>(m) * cfg.vol * cfg.vol / ev.sum();
    sigma = linalg::symmetrize(q * ev.asDiagonal() * q.transpose());

    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    const auto zeros = static_cast<Eigen::Index>(std::floor(cfg.mean_sparsity * static_cast<double>(m)));
    for (Eigen::Index i = zeros; i < m; ++i) mu(order[static_cast<std::size_t>(i)]) = cfg.mean_scale * uniform(rng);
  }

  if (cfg.target_sharpe > 0.0 && mu.squaredNorm() > 0.0) {
    const double sharpe = std::sqrt(mu.dot(sigma.ldlt().solve(mu)));
    mu *= cfg.target_sharpe / sharpe;
  }
  return PopulationSpec(std::move(mu), std::move(sigma), cfg.r_bar);
}

// ---------------------------------------------------------------------------
// Simulation study

struct SimulationConfig {
  PopulationSpec pop;
  std::vector<Eigen::Index> n_list;
  std::vector<StrategySpec> strategies;
  int K = 100;
  std::uint64_t seed = 0;
  int cv_k = 5;
  std::size_t threads = 0;

  void validate() const {
    // K = 1 is accepted; the weight covariance is then taken as zero.
    if (K < 1) throw Error(ErrorKind::ConfigError, "simulation needs K >= 1");
    if (n_list.empty()) throw Error(ErrorKind::ConfigError, "simulation needs at least one sample size");
    for (auto n : n_list) {
      if (n < 2) throw Error(ErrorKind::ConfigError, "sample sizes must be >= 2");
    }
    if (strategies.empty()) throw Error(ErrorKind::ConfigError, "simulation needs at least one strategy");
  }
};

struct SimulationCell {
  std::optional<double> sharpe;     // empty: infeasible cell
  std::optional<RiskReport> risk;
  int failures = 0;                 // replications where the estimator raised
  std::map<std::string, int> failure_kinds;
  int zero_risk = 0;                // replications scored with Sharpe 0
  std::vector<double> penalties;    // chosen penalty per replication, when any
};

struct SimulationTables {
  std::vector<std::string> strategies;
  std::vector<Eigen::Index> n_list;
  std::vector<std::vector<SimulationCell>> cells;  // [strategy][n]
  double population_sharpe = 0.0;
};

namespace detail {

struct ReplicationFit {
  std::optional<Eigen::VectorXd> theta;
  std::optional<double> penalty;
  std::string error;
};

inline RiskReport single_draw_risk(const Eigen::VectorXd& theta, const PopulationSpec& pop) {
  RiskReport out;
  const Eigen::VectorXd gap = theta - optimal_weights(pop);
  out.bias_sq = gap.dot(pop.second_moment() * gap);
  out.variance = 0.0;
  out.risk = out.bias_sq;
  out.mean_weights = theta;
  out.weight_cov = Eigen::MatrixXd::Zero(theta.size(), theta.size());
  return out;
}

}  // namespace detail

/// Replication k at sample size n uses dataset seed derive_seed(seed, {n, k}),
/// shared by all strategies; strategy randomness is keyed on its label.
inline SimulationTables run_simulation(const SimulationConfig& cfg) {
  cfg.validate();
  const std::size_t S = cfg.strategies.size();
  const std::size_t N = cfg.n_list.size();
  const auto K = static_cast<std::size_t>(cfg.K);

  // fits[(i * K + k) * S + s]
  std::vector<detail::ReplicationFit> fits(N * K * S);
  parallel_for(N * K, cfg.threads, [&](std::size_t task) {
    const std::size_t i = task / K;
    const std::size_t k = task % K;
    const auto n = static_cast<std::uint64_t>(cfg.n_list[i]);
    const Eigen::MatrixXd x = sample_returns_matrix(cfg.pop, cfg.n_list[i], derive_seed(cfg.seed, {n, k}));
    for (std::size_t s = 0; s < S; ++s) {
      const auto& spec = cfg.strategies[s];
      FitContext ctx{cfg.pop.r_bar(), cfg.cv_k, derive_seed(cfg.seed, {n, k, stable_hash(spec.label)}), &cfg.pop};
      auto& slot = fits[task * S + s];
      try {
        auto fit = fit_strategy(spec, x, ctx);
        slot.theta = std::move(fit.theta);
        slot.penalty = fit.penalty;
      } catch (const Error& e) {
        slot.error = std::string(kind_name(e.kind()));
      }
    }
  });

  SimulationTables out;
  for (const auto& spec : cfg.strategies) out.strategies.push_back(spec.label);
  out.n_list = cfg.n_list;
  out.population_sharpe = population_sharpe(optimal_weights(cfg.pop), cfg.pop);
  out.cells.assign(S, std::vector<SimulationCell>(N));
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t i = 0; i < N; ++i) {
      auto& cell = out.cells[s][i];
      std::vector<Eigen::VectorXd> thetas;
      thetas.reserve(K);
      for (std::size_t k = 0; k < K; ++k) {
        const auto& slot = fits[(i * K + k) * S + s];
        if (!slot.theta) {
          ++cell.failures;
          ++cell.failure_kinds[slot.error];
          continue;
        }
        thetas.push_back(*slot.theta);
        if (slot.penalty) cell.penalties.push_back(*slot.penalty);
      }
      if (cell.failures > 0) continue;
      double total = 0.0;
      for (const auto& theta : thetas) {
        try {
          total += population_sharpe(theta, cfg.pop);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::ZeroRiskPortfolio) throw;
          ++cell.zero_risk;
        }
      }
      cell.sharpe = total / static_cast<double>(K);
      cell.risk = K >= 2 ? estimation_risk(thetas, cfg.pop) : detail::single_draw_risk(thetas.front(), cfg.pop);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sharpe-equality test

struct JkResult {
  double z = 0.0;
  double p_value = 1.0;
};

/// Jobson-Korkie statistic with Memmel's variance, moments normalised by 1/T.
inline JkResult jobson_korkie_test(const Eigen::VectorXd& returns_q, const Eigen::VectorXd& returns_l) {
  if (returns_q.size() != returns_l.size()) throw Error(ErrorKind::InvalidArgument, "return series differ in length");
  const Eigen::Index t = returns_q.size();
  if (t < 3) throw Error(ErrorKind::DegenerateSeries, "Sharpe test needs at least 3 returns");
  const double T = static_cast<double>(t);
  const double mq = returns_q.mean();
  const double ml = returns_l.mean();
  const Eigen::ArrayXd dq = returns_q.array() - mq;
  const Eigen::ArrayXd dl = returns_l.array() - ml;
  const double vq = dq.square().sum() / T;
  const double vl = dl.square().sum() / T;
  if (!(vq > tol::kZeroVariance) || !(vl > tol::kZeroVariance)) {
    throw Error(ErrorKind::DegenerateSeries, "Sharpe test needs nonzero variance in both series");
  }
  const double cql = (dq * dl).sum() / T;
  const double sq = std::sqrt(vq);
  const double sl = std::sqrt(vl);

  JkResult out;
  const double numerator = sl * mq - sq * ml;
  if (numerator == 0.0) return out;
  // Every term is written symmetrically in (q, l) so swapping flips only the numerator.
  const double psi = (2.0 * vq * vl - 2.0 * sq * sl * cql + 0.5 * (mq * mq * vl + ml * ml * vq) -
                      (mq * ml) / (sq * sl) * cql * cql) /
                     T;
  if (!(psi > 0.0)) throw Error(ErrorKind::DegenerateSeries, "Sharpe test variance is not positive");
  out.z = numerator / std::sqrt(psi);
  out.p_value = std::erfc(std::abs(out.z) / std::sqrt(2.0));
  return out;
}

/// "***", "**", "*" at the 1%, 5% and 10% levels.
inline std::string significance_stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.10) return "*";
  return "";
}

// ---------------------------------------------------------------------------
// Rolling-window backtest

struct BacktestConfig {
  Eigen::Index window = 60;
  std::vector<StrategySpec> strategies;
  int cv_k = 5;  // 0 selects leave-one-out
  double r_bar = 1.0;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

struct SeriesSummary {
  double mean = 0.0;
  double std = 0.0;                  // 1/T normalisation
  std::optional<double> sharpe;      // empty when std is zero
};

inline SeriesSummary summarize_series(const Eigen::VectorXd& r) {
  SeriesSummary out;
  if (r.size() == 0) return out;
  out.mean = r.mean();
  out.std = std::sqrt((r.array() - out.mean).square().sum() / static_cast<double>(r.size()));
  if (out.std > 0.0) out.sharpe = out.mean / out.std;
  return out;
}

struct BacktestResult {
  std::vector<std::string> strategies;
  std::vector<std::string> periods;      // label of each out-of-sample period
  Eigen::MatrixXd oos_returns;           // (T - window) x strategies
  std::vector<SeriesSummary> summary;
  std::vector<int> failed_windows;
  std::vector<bool> strategy_failed;     // every window failed
  std::vector<std::vector<std::optional<double>>> penalties;  // [strategy][window]
  Eigen::MatrixXd jk_z;                  // NaN where the test is undefined
  Eigen::MatrixXd jk_p;
  std::vector<std::string> diagnostics;
};

inline BacktestResult run_backtest(const ReturnsMatrix& returns, const BacktestConfig& cfg) {
  const Eigen::Index T = returns.n();
  if (cfg.window < 2) throw Error(ErrorKind::ConfigError, "window must be >= 2");
  if (cfg.window >= T) throw Error(ErrorKind::ConfigError, "window must be smaller than the number of periods");
  if (cfg.strategies.empty()) throw Error(ErrorKind::ConfigError, "backtest needs at least one strategy");
  if (!(cfg.r_bar > 0.0)) throw Error(ErrorKind::ConfigError, "r_bar must be positive");
  const std::size_t S = cfg.strategies.size();
  const auto W = static_cast<std::size_t>(T - cfg.window);
  const Eigen::MatrixXd& x = returns.data();

  struct WindowFit {
    double ret = 0.0;
    std::optional<double> penalty;
    std::string error;
  };
  std::vector<WindowFit> fits(W * S);
  parallel_for(W, cfg.threads, [&](std::size_t w) {
    const Eigen::Index t = cfg.window + static_cast<Eigen::Index>(w);
    const Eigen::MatrixXd train = x.middleRows(t - cfg.window, cfg.window);
    for (std::size_t s = 0; s < S; ++s) {
      const auto& spec = cfg.strategies[s];
      FitContext ctx{cfg.r_bar, cfg.cv_k, derive_seed(cfg.seed, {static_cast<std::uint64_t>(t), stable_hash(spec.label)}),
                     nullptr};
      auto& slot = fits[w * S + s];
      try {
        const auto fit = fit_strategy(spec, train, ctx);
        slot.ret = x.row(t).dot(fit.theta);
        slot.penalty = fit.penalty;
      } catch (const Error& e) {
        slot.error = std::string(kind_name(e.kind())) + ": " + e.what();
      }
    }
  });

  BacktestResult out;
  for (const auto& spec : cfg.strategies) out.strategies.push_back(spec.label);
  for (std::size_t w = 0; w < W; ++w) out.periods.push_back(returns.period_index()[static_cast<std::size_t>(cfg.window) + w]);
  out.oos_returns.resize(static_cast<Eigen::Index>(W), static_cast<Eigen::Index>(S));
  out.failed_windows.assign(S, 0);
  out.penalties.assign(S, std::vector<std::optional<double>>(W));
  for (std::size_t w = 0; w < W; ++w) {
    for (std::size_t s = 0; s < S; ++s) {
      const auto& slot = fits[w * S + s];
      out.oos_returns(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(s)) = slot.ret;
      out.penalties[s][w] = slot.penalty;
      if (!slot.error.empty()) {
        ++out.failed_windows[s];
        out.diagnostics.push_back(out.strategies[s] + " @ " + out.periods[w] + ": " + slot.error);
      }
    }
  }
  for (std::size_t s = 0; s < S; ++s) {
    out.strategy_failed.push_back(out.failed_windows[s] == static_cast<int>(W));
    out.summary.push_back(summarize_series(out.oos_returns.col(static_cast<Eigen::Index>(s))));
  }

  const auto SS = static_cast<Eigen::Index>(S);
  out.jk_z = Eigen::MatrixXd::Constant(SS, SS, std::numeric_limits<double>::quiet_NaN());
  out.jk_p = out.jk_z;
  for (Eigen::Index q = 0; q < SS; ++q) {
    for (Eigen::Index l = 0; l < SS; ++l) {
      if (out.strategy_failed[static_cast<std::size_t>(q)] || out.strategy_failed[static_cast<std::size_t>(l)]) continue;
      try {
        const auto jk = jobson_korkie_test(out.oos_returns.col(q), out.oos_returns.col(l));
        out.jk_z(q, l) = jk.z;
        out.jk_p(q, l) = jk.p_value;
      } catch (const Error&) {
      }
    }
  }
  return out;
}

}  // namespace mlport
