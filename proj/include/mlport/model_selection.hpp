#pragma once

// K-fold cross-validation of the penalty level. Rows are assigned to folds
// at random (not in time blocks); each candidate penalty is fitted on the
// complement of a fold and scored by its mean squared deviation from r_bar
// on the held-out rows.

#include "mlport/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace mlport {

/// Balanced random partition of n rows into k folds (labels 1..k).
struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;
  std::uint64_t seed = 0;

  Eigen::Index n() const noexcept { return static_cast<Eigen::Index>(assignments.size()); }

  std::vector<Eigen::Index> rows_in(int fold) const {
    std::vector<Eigen::Index> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
      if (assignments[i] == fold) out.push_back(static_cast<Eigen::Index>(i));
    }
    return out;
  }

  std::vector<Eigen::Index> rows_outside(int fold) const {
    std::vector<Eigen::Index> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
      if (assignments[i] != fold) out.push_back(static_cast<Eigen::Index>(i));
    }
    return out;
  }
};

inline FoldPlan make_folds(Eigen::Index n, int k, std::uint64_t seed) {
  if (k < 2 || static_cast<Eigen::Index>(k) > n) {
    throw Error(ErrorKind::InvalidFoldCount,
                "fold count " + std::to_string(k) + " must lie in [2, " + std::to_string(n) + "]");
  }
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t pos = 0; pos < perm.size(); ++pos) {
    plan.assignments[static_cast<std::size_t>(perm[pos])] = static_cast<int>(pos % static_cast<std::size_t>(k)) + 1;
  }
  return plan;
}

/// Mean CV error per grid point, the per-fold errors and the selected penalty.
/// Infeasible grid points carry +inf.
struct CvCurve {
  PenaltyKind kind = PenaltyKind::none;
  std::vector<double> lambdas;
  std::vector<double> errors;
  Eigen::MatrixXd per_fold;  // k x |grid|
  double chosen = 0.0;
  std::size_t chosen_index = 0;
};

namespace detail {

inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

/// Fit every grid point on one training design; +inf where the fit fails.
inline std::vector<std::optional<Eigen::VectorXd>> fit_grid(const RegressionDesign& train, PenaltyKind kind,
                                                            const std::vector<double>& grid) {
  std::vector<std::optional<Eigen::VectorXd>> out(grid.size());
  switch (kind) {
    case PenaltyKind::none: {
      std::optional<Eigen::VectorXd> ols;
      try {
        ols = ols_weights(train);
      } catch (const Error&) {
      }
      for (auto& slot : out) slot = ols;
      break;
    }
    case PenaltyKind::ridge: {
      const RidgePath path(train);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        try {
          out[i] = path.solve(grid[i]);
        } catch (const Error&) {
        }
      }
      break;
    }
    case PenaltyKind::lasso: {
      // Descending penalties with warm starts along the path.
      std::vector<std::size_t> order(grid.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid[a] > grid[b]; });
      Eigen::VectorXd warm = Eigen::VectorXd::Zero(train.m());
      for (std::size_t i : order) {
        try {
          warm = lasso_weights(train, grid[i], &warm);
          out[i] = warm;
        } catch (const Error&) {
        }
      }
      break;
    }
    case PenaltyKind::pcr: {
      const PcrBasis basis(train);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        try {
          out[i] = basis.solve(static_cast<Eigen::Index>(grid[i]));
        } catch (const Error&) {
        }
      }
      break;
    }
  }
  return out;
}

inline bool prefer_on_tie(PenaltyKind kind, double candidate, double incumbent) {
  // More regularisation under indifference: larger lambda, fewer components.
  return kind == PenaltyKind::pcr ? candidate < incumbent : candidate > incumbent;
}

}  // namespace detail

inline CvCurve cross_validate(const Eigen::MatrixXd& x, double r_bar, PenaltyKind kind,
                              const std::vector<double>& grid, const FoldPlan& plan) {
  if (plan.n() != x.rows()) throw Error(ErrorKind::InvalidArgument, "fold plan does not match the number of rows");
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty penalty grid");
  for (double g : grid) PenaltySpec{kind, g}.validate(x.cols());

  CvCurve curve;
  curve.kind = kind;
  curve.lambdas = grid;
  curve.per_fold = Eigen::MatrixXd::Zero(plan.k, static_cast<Eigen::Index>(grid.size()));
  for (int fold = 1; fold <= plan.k; ++fold) {
    const Eigen::MatrixXd holdout = detail::take_rows(x, plan.rows_in(fold));
    const RegressionDesign train = RegressionDesign::from_returns(detail::take_rows(x, plan.rows_outside(fold)), r_bar);
    const auto fits = detail::fit_grid(train, kind, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      curve.per_fold(fold - 1, static_cast<Eigen::Index>(i)) =
          fits[i] ? holdout_error(holdout, r_bar, *fits[i]) : detail::kInfeasible;
    }
  }

  curve.errors.resize(grid.size());
  bool found = false;
  double best = detail::kInfeasible;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    curve.errors[i] = curve.per_fold.col(static_cast<Eigen::Index>(i)).sum() / static_cast<double>(plan.k);
    const double e = curve.errors[i];
    if (!std::isfinite(e)) continue;
    if (!found || e < best || (e == best && detail::prefer_on_tie(kind, grid[i], curve.chosen))) {
      found = true;
      best = e;
      curve.chosen = grid[i];
      curve.chosen_index = i;
    }
  }
  if (!found) throw Error(ErrorKind::AllInfeasible, "no grid point is feasible on every fold");
  return curve;
}

inline CvCurve cross_validate(const ReturnsMatrix& returns, double r_bar, PenaltyKind kind,
                              const std::vector<double>& grid, const FoldPlan& plan) {
  return cross_validate(returns.data(), r_bar, kind, grid, plan);
}

/// 100 log-spaced penalties from lambda_max down to lambda_max * 1e-4, then 0.
/// lambda_max is the smallest lasso penalty with an all-zero solution.
inline std::vector<double> penalty_grid(const RegressionDesign& d, int points = 100, double ratio = 1e-4) {
  const double top = lasso_lambda_max(d);
  std::vector<double> grid;
  if (top > 0.0 && points > 0) {
    grid.reserve(static_cast<std::size_t>(points) + 1);
    const double log_top = std::log(top);
    const double log_bottom = std::log(top * ratio);
    for (int i = 0; i < points; ++i) {
      const double t = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
      grid.push_back(std::exp(log_top + t * (log_bottom - log_top)));
    }
  }
  grid.push_back(0.0);
  return grid;
}

/// Component counts 1..min(m, smallest positive rank over fold complements).
inline std::vector<double> pcr_grid(const Eigen::MatrixXd& x, const FoldPlan& plan) {
  Eigen::Index limit = x.cols();
  for (int fold = 1; fold <= plan.k; ++fold) {
    const RegressionDesign train = RegressionDesign::from_returns(detail::take_rows(x, plan.rows_outside(fold)), 1.0);
    limit = std::min(limit, PcrBasis(train).positive_rank());
  }
  std::vector<double> grid;
  for (Eigen::Index k = 1; k <= limit; ++k) grid.push_back(static_cast<double>(k));
  return grid;
}

inline std::vector<double> default_grid(const Eigen::MatrixXd& x, double r_bar, PenaltyKind kind, const FoldPlan& plan) {
  switch (kind) {
    case PenaltyKind::none: return {0.0};
    case PenaltyKind::lasso: return penalty_grid(RegressionDesign::from_returns(x, r_bar));
    case PenaltyKind::ridge: {
      // Same grid in the (1/n)-normalised units the lasso uses; the ridge
      // penalty acts on X'X directly, so it is n times larger.
      auto grid = penalty_grid(RegressionDesign::from_returns(x, r_bar));
      for (double& g : grid) g *= static_cast<double>(x.rows());
      return grid;
    }
    case PenaltyKind::pcr: return pcr_grid(x, plan);
  }
  return {0.0};
}

/// Fit at a fixed penalty on the whole sample.
inline Eigen::VectorXd fit_penalized(const RegressionDesign& d, PenaltySpec spec) {
  spec.validate(d.m());
  switch (spec.kind) {
    case PenaltyKind::none: return ols_weights(d);
    case PenaltyKind::ridge: return ridge_weights(d, spec.lambda);
    case PenaltyKind::lasso: return lasso_weights(d, spec.lambda);
    case PenaltyKind::pcr: return pcr_weights(d, static_cast<Eigen::Index>(spec.lambda));
  }
  return ols_weights(d);
}

struct CvFit {
  Eigen::VectorXd theta;
  CvCurve curve;
};

/// Select the penalty by cross-validation, then refit on all rows.
inline CvFit fit_with_cv(const Eigen::MatrixXd& x, double r_bar, PenaltyKind kind, const FoldPlan& plan,
                         std::vector<double> grid = {}) {
  if (grid.empty()) grid = default_grid(x, r_bar, kind, plan);
  if (grid.empty()) throw Error(ErrorKind::AllInfeasible, "no admissible penalty values");
  CvFit out;
  out.curve = cross_validate(x, r_bar, kind, grid, plan);
  out.theta = fit_penalized(RegressionDesign::from_returns(x, r_bar), PenaltySpec{kind, out.curve.chosen});
  return out;
}

}  // namespace mlport
