#include "support.hpp"

using namespace mlport;
using Catch::Approx;

TEST_CASE("folds are a balanced partition") {
  const auto plan = make_folds(10, 5, 1);
  std::vector<int> sizes(5, 0);
  for (int a : plan.assignments) {
    REQUIRE(a >= 1);
    REQUIRE(a <= 5);
    ++sizes[static_cast<std::size_t>(a - 1)];
  }
  CHECK(sizes == std::vector<int>(5, 2));
  std::vector<Eigen::Index> all;
  for (int f = 1; f <= 5; ++f) {
    const auto in = plan.rows_in(f);
    all.insert(all.end(), in.begin(), in.end());
    CHECK(in.size() + plan.rows_outside(f).size() == 10);
  }
  std::sort(all.begin(), all.end());
  for (Eigen::Index i = 0; i < 10; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("k = n is leave-one-out") {
  const auto plan = make_folds(10, 10, 2);
  for (int f = 1; f <= 10; ++f) CHECK(plan.rows_in(f).size() == 1);
}

TEST_CASE("folds are deterministic per seed") {
  CHECK(make_folds(37, 5, 9).assignments == make_folds(37, 5, 9).assignments);
  CHECK(make_folds(37, 5, 9).assignments != make_folds(37, 5, 10).assignments);
}

TEST_CASE("fold count outside [2, n]") {
  CHECK(testing::error_kind_of([] { make_folds(10, 1, 0); }) == ErrorKind::InvalidFoldCount);
  CHECK(testing::error_kind_of([] { make_folds(10, 11, 0); }) == ErrorKind::InvalidFoldCount);
}

TEST_CASE("cross-validation table by hand") {
  Eigen::MatrixXd x(4, 1);
  x << 1, 2, 3, 4;
  FoldPlan plan;
  plan.k = 2;
  plan.assignments = {1, 2, 1, 2};
  const auto curve = cross_validate(x, 1.0, PenaltyKind::ridge, {0.0, 1.0}, plan);
  // fold 1 trains on {2, 4}: theta = 6 / (20 + lambda); fold 2 trains on {1, 3}: theta = 4 / (10 + lambda)
  CHECK(curve.per_fold(0, 0) == Approx(0.25));
  CHECK(curve.per_fold(1, 0) == Approx(0.2));
  CHECK(curve.per_fold(0, 1) == Approx(13.0 / 49.0));
  CHECK(curve.per_fold(1, 1) == Approx(17.0 / 121.0));
  CHECK(curve.errors[0] == Approx(0.225));
  CHECK(curve.errors[1] == Approx((13.0 / 49.0 + 17.0 / 121.0) / 2.0));
  CHECK(curve.chosen == 1.0);
  CHECK(curve.chosen_index == 1);
}

TEST_CASE("perfect constant fit has zero CV error at lambda 0") {
  Eigen::MatrixXd x(8, 2);
  x.rowwise() = Eigen::RowVector2d(0.5, 0.25);
  x(0, 1) = 0.25;  // still identical rows
  const auto plan = make_folds(8, 4, 3);
  const auto curve = cross_validate(x, 1.0, PenaltyKind::lasso, {0.01, 0.0}, plan);
  // lambda = 0 on a rank-one design is not identifiable, so use PCR with one component instead
  const auto pcr = cross_validate(x, 1.0, PenaltyKind::pcr, {1.0}, plan);
  CHECK(pcr.errors[0] < 1e-20);
  CHECK(std::isinf(curve.errors[1]));
  CHECK(curve.chosen == 0.01);
}

TEST_CASE("CV curve is invariant to fold relabelling") {
  std::mt19937_64 rng(71);
  const Eigen::MatrixXd x = testing::random_returns(40, 5, rng);
  const auto plan = make_folds(40, 5, 4);
  FoldPlan relabelled = plan;
  for (int& a : relabelled.assignments) a = 6 - a;
  const auto grid = penalty_grid(RegressionDesign::from_returns(x, 1.0));
  for (auto kind : {PenaltyKind::ridge, PenaltyKind::lasso}) {
    const auto a = cross_validate(x, 1.0, kind, grid, plan);
    const auto b = cross_validate(x, 1.0, kind, grid, relabelled);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(a.errors[i] == Approx(b.errors[i]).epsilon(1e-12));
    CHECK(a.chosen == b.chosen);
  }
}

TEST_CASE("ridge CV curve is continuous and the choice is finite") {
  std::mt19937_64 rng(72);
  const Eigen::MatrixXd x = testing::random_returns(30, 6, rng);
  const auto plan = make_folds(30, 5, 5);
  std::vector<double> grid;
  for (int i = 0; i <= 400; ++i) grid.push_back(1e-4 * std::pow(10.0, 6.0 * i / 400.0));
  const auto curve = cross_validate(x, 1.0, PenaltyKind::ridge, grid, plan);
  for (std::size_t i = 0; i < grid.size(); ++i) REQUIRE(std::isfinite(curve.errors[i]));
  for (std::size_t i = 1; i < grid.size(); ++i) {
    CHECK(std::abs(curve.errors[i] - curve.errors[i - 1]) < 0.02 * std::max(curve.errors[i], 1e-3));
  }
  CHECK(std::isfinite(curve.errors[curve.chosen_index]));
  CHECK(curve.errors[curve.chosen_index] == *std::min_element(curve.errors.begin(), curve.errors.end()));
}

TEST_CASE("penalty grid shape") {
  std::mt19937_64 rng(73);
  const auto d = RegressionDesign::from_returns(testing::random_returns(30, 4, rng), 1.0);
  const auto grid = penalty_grid(d);
  REQUIRE(grid.size() == 101);
  CHECK(grid.front() == Approx(lasso_lambda_max(d)));
  CHECK(grid[99] == Approx(1e-4 * lasso_lambda_max(d)));
  CHECK(grid.back() == 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] < grid[i - 1]);
}

TEST_CASE("PCR grid stops at the smallest complement rank") {
  std::mt19937_64 rng(74);
  const Eigen::MatrixXd x = testing::random_returns(10, 20, rng);
  const auto plan = make_folds(10, 5, 6);
  const auto grid = pcr_grid(x, plan);
  CHECK(grid.size() == 8);  // every complement has 8 rows
  const auto fit = fit_with_cv(x, 1.0, PenaltyKind::pcr, plan);
  CHECK(fit.curve.chosen >= 1);
  CHECK(fit.curve.chosen <= 8);
}

TEST_CASE("every grid point infeasible") {
  std::mt19937_64 rng(75);
  const Eigen::MatrixXd x = testing::random_returns(10, 20, rng);
  const auto plan = make_folds(10, 2, 7);
  CHECK(testing::error_kind_of([&] { cross_validate(x, 1.0, PenaltyKind::ridge, {0.0}, plan); }) ==
        ErrorKind::AllInfeasible);
  CHECK(testing::error_kind_of([&] { cross_validate(x, 1.0, PenaltyKind::none, {0.0}, plan); }) ==
        ErrorKind::AllInfeasible);
}

TEST_CASE("large samples choose small penalties") {
  // Sharpe about 1.5; with n = 10000 the CV optimum sits near the bottom of the grid.
  const Eigen::Vector3d mu(0.06, 0.03, 0.045);
  Eigen::Matrix3d sigma;
  sigma << 0.0025, 0.0005, 0.0003, 0.0005, 0.0016, 0.0002, 0.0003, 0.0002, 0.0020;
  const PopulationSpec pop(mu, sigma, 1.0);
  const Eigen::Index n = 10000;
  for (auto kind : {PenaltyKind::ridge, PenaltyKind::lasso}) {
    int passes = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Eigen::MatrixXd x = sample_returns_matrix(pop, n, derive_seed(seed, {1}));
      const auto fit = fit_with_cv(x, 1.0, kind, make_folds(n, 5, seed));
      std::vector<double> sorted = fit.curve.lambdas;
      std::sort(sorted.begin(), sorted.end());
      if (fit.curve.chosen <= sorted[sorted.size() / 10]) ++passes;
    }
    CHECK(passes >= 18);
  }
}

TEST_CASE("ridge grid is the lasso grid in unnormalised units") {
  std::mt19937_64 rng(77);
  const Eigen::MatrixXd x = testing::random_returns(40, 4, rng);
  const auto plan = make_folds(40, 5, 1);
  const auto lasso = default_grid(x, 1.0, PenaltyKind::lasso, plan);
  const auto ridge = default_grid(x, 1.0, PenaltyKind::ridge, plan);
  REQUIRE(lasso.size() == ridge.size());
  for (std::size_t i = 0; i < lasso.size(); ++i) CHECK(ridge[i] == Approx(40.0 * lasso[i]));
}

TEST_CASE("fit with CV refits on all rows at the chosen penalty") {
  std::mt19937_64 rng(76);
  const Eigen::MatrixXd x = testing::random_returns(50, 6, rng);
  const auto fit = fit_with_cv(x, 1.0, PenaltyKind::ridge, make_folds(50, 5, 8));
  CHECK(testing::rel_diff(fit.theta, ridge_weights(RegressionDesign::from_returns(x, 1.0), fit.curve.chosen)) < 1e-12);
}
