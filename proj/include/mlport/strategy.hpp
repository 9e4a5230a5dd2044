#pragma once

// Named weight-estimation strategies with their hyperparameter policy, and a
// single entry point that fits any of them on a block of returns.

#include "mlport/model_selection.hpp"
#include "mlport/risk.hpp"
#include "mlport/sampling.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mlport {

enum class StrategyKind {
  population,
  fixed,
  mv,
  ridge,
  lasso,
  pcr,
  spike_slab,
  equal_weight,
  mv_noshort,
  min_variance,
  empirical_bayes,
};

struct StrategySpec {
  std::string label;
  StrategyKind kind = StrategyKind::mv;
  std::optional<double> penalty;  // ridge/lasso/pcr; empty selects it by cross-validation
  SpikeSlabConfig spike_slab;     // seed is overridden per fit
  std::optional<double> uniform_inclusion;  // replaces spike_slab.pi with this value for every asset
  double gross = 1.0;             // equal weights
  Eigen::VectorXd fixed_theta;    // kind == fixed

  bool uses_cv() const {
    return !penalty && (kind == StrategyKind::ridge || kind == StrategyKind::lasso || kind == StrategyKind::pcr);
  }

  PenaltyKind penalty_kind() const {
    switch (kind) {
      case StrategyKind::ridge: return PenaltyKind::ridge;
      case StrategyKind::lasso: return PenaltyKind::lasso;
      case StrategyKind::pcr: return PenaltyKind::pcr;
      default: return PenaltyKind::none;
    }
  }

  /// Parses "name" or "name:policy", e.g. "ridge", "lasso:cv", "ridge:0.5", "pcr:3".
  static StrategySpec parse(const std::string& token) {
    StrategySpec spec;
    spec.label = token;
    const auto colon = token.find(':');
    const std::string name = token.substr(0, colon);
    const std::string policy = colon == std::string::npos ? "" : token.substr(colon + 1);
    if (name == "mv" || name == "ols") spec.kind = StrategyKind::mv;
    else if (name == "ridge") spec.kind = StrategyKind::ridge;
    else if (name == "lasso") spec.kind = StrategyKind::lasso;
    else if (name == "pcr") spec.kind = StrategyKind::pcr;
    else if (name == "ss" || name == "spike_slab") spec.kind = StrategyKind::spike_slab;
    else if (name == "ew" || name == "equal_weight") spec.kind = StrategyKind::equal_weight;
    else if (name == "mvc" || name == "mv_noshort") spec.kind = StrategyKind::mv_noshort;
    else if (name == "minvar" || name == "min_variance") spec.kind = StrategyKind::min_variance;
    else if (name == "eb" || name == "empirical_bayes") spec.kind = StrategyKind::empirical_bayes;
    else if (name == "population") spec.kind = StrategyKind::population;
    else throw Error(ErrorKind::ConfigError, "unknown strategy '" + name + "'");

    const bool penalised = spec.kind == StrategyKind::ridge || spec.kind == StrategyKind::lasso ||
                           spec.kind == StrategyKind::pcr;
    if (policy.empty() || policy == "cv") {
      if (!policy.empty() && !penalised) throw Error(ErrorKind::ConfigError, "strategy '" + name + "' has no penalty");
      return spec;
    }
    if (spec.kind == StrategyKind::equal_weight) {
      const auto gross = detail::parse_number(policy);
      if (!gross) throw Error(ErrorKind::ConfigError, "bad gross exposure in '" + token + "'");
      spec.gross = *gross;
      return spec;
    }
    if (!penalised) throw Error(ErrorKind::ConfigError, "strategy '" + name + "' takes no parameter");
    const auto value = detail::parse_number(policy);
    if (!value) throw Error(ErrorKind::ConfigError, "bad penalty in '" + token + "'");
    spec.penalty = *value;
    return spec;
  }

  static StrategySpec fixed_weights(std::string label, Eigen::VectorXd theta) {
    StrategySpec spec;
    spec.label = std::move(label);
    spec.kind = StrategyKind::fixed;
    spec.fixed_theta = std::move(theta);
    return spec;
  }
};

struct FitContext {
  double r_bar = 1.0;
  int cv_k = 5;                     // 0 selects leave-one-out
  std::uint64_t seed = 0;
  const PopulationSpec* population = nullptr;
};

struct StrategyFit {
  Eigen::VectorXd theta;
  std::optional<double> penalty;      // chosen or fixed penalty
  std::optional<CvCurve> curve;       // when chosen by cross-validation
  Eigen::VectorXd inclusion_freq;     // spike-and-slab only
  long singular_rejections = 0;
};

inline StrategyFit fit_strategy(const StrategySpec& spec, const Eigen::MatrixXd& x, const FitContext& ctx) {
  StrategyFit fit;
  const Eigen::Index m = x.cols();
  switch (spec.kind) {
    case StrategyKind::population:
      if (!ctx.population) throw Error(ErrorKind::ConfigError, "population strategy needs a population");
      fit.theta = optimal_weights(*ctx.population);
      return fit;
    case StrategyKind::fixed:
      if (spec.fixed_theta.size() != m) throw Error(ErrorKind::InvalidArgument, "fixed weights have the wrong length");
      fit.theta = spec.fixed_theta;
      return fit;
    case StrategyKind::equal_weight:
      fit.theta = equal_weights(m, spec.gross);
      return fit;
    case StrategyKind::min_variance:
      fit.theta = min_variance_weights(compute_moments(x));
      return fit;
    case StrategyKind::empirical_bayes:
      fit.theta = empirical_bayes_weights(compute_moments(x), ctx.r_bar);
      return fit;
    case StrategyKind::mv_noshort:
      fit.theta = mv_noshort_weights(RegressionDesign::from_returns(x, ctx.r_bar));
      return fit;
    case StrategyKind::mv:
      fit.theta = ols_weights(RegressionDesign::from_returns(x, ctx.r_bar));
      return fit;
    case StrategyKind::spike_slab: {
      SpikeSlabConfig cfg = spec.spike_slab;
      cfg.seed = derive_seed(ctx.seed, {2});
      if (spec.uniform_inclusion) cfg.pi.assign(static_cast<std::size_t>(m), *spec.uniform_inclusion);
      const auto post = spike_slab_sample(RegressionDesign::from_returns(x, ctx.r_bar), cfg);
      fit.theta = post.point_estimate.theta;
      fit.inclusion_freq = post.inclusion_freq;
      fit.singular_rejections = post.singular_rejections;
      return fit;
    }
    case StrategyKind::ridge:
    case StrategyKind::lasso:
    case StrategyKind::pcr: {
      if (spec.penalty) {
        fit.penalty = spec.penalty;
        fit.theta = fit_penalized(RegressionDesign::from_returns(x, ctx.r_bar), PenaltySpec{spec.penalty_kind(), *spec.penalty});
        return fit;
      }
      const int k = ctx.cv_k == 0 ? static_cast<int>(x.rows()) : ctx.cv_k;
      const FoldPlan plan = make_folds(x.rows(), k, derive_seed(ctx.seed, {1}));
      auto cv = fit_with_cv(x, ctx.r_bar, spec.penalty_kind(), plan);
      fit.theta = std::move(cv.theta);
      fit.penalty = cv.curve.chosen;
      fit.curve = std::move(cv.curve);
      return fit;
    }
  }
  throw Error(ErrorKind::ConfigError, "unhandled strategy");
}

}  // namespace mlport
