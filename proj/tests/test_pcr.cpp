#include "support.hpp"

using namespace mlport;
using Catch::Approx;

TEST_CASE("PCR with all components equals OLS") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::MatrixXd x = testing::random_returns(60, 7, rng);
    const auto d = RegressionDesign::from_returns(x, 1.0);
    CHECK(testing::rel_diff(pcr_weights(d, 7), ols_weights(d)) < 1e-6);
  }
}

TEST_CASE("PCR weights are orthogonal to discarded components") {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::MatrixXd x = testing::random_returns(40, 8, rng);
    const auto d = RegressionDesign::from_returns(x, 1.0);
    const PcrBasis basis(d);
    for (Eigen::Index k = 1; k < 8; ++k) {
      const Eigen::VectorXd theta = basis.solve(k);
      const Eigen::VectorXd discarded = basis.components().rightCols(8 - k).transpose() * theta;
      CHECK(discarded.cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, theta.norm()));
    }
  }
}

TEST_CASE("PCR on a diagonal gram keeps the high variance axis") {
  Eigen::MatrixXd x(4, 2);
  x << 2, 0, 2, 0, 0, 1, 0, 1;  // X'X = diag(8, 2), X'1 = (4, 2)
  const auto d = RegressionDesign::from_returns(x, 1.0);
  const Eigen::VectorXd theta = pcr_weights(d, 1);
  CHECK(theta(0) == Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(theta(1)) < 1e-14);
}

TEST_CASE("PCR component count beyond the rank") {
  std::mt19937_64 rng(43);
  const Eigen::MatrixXd x = testing::random_returns(5, 9, rng);
  const auto d = RegressionDesign::from_returns(x, 1.0);
  const PcrBasis basis(d);
  CHECK(basis.positive_rank() == 5);
  CHECK_NOTHROW(basis.solve(5));
  CHECK(testing::error_kind_of([&] { basis.solve(6); }) == ErrorKind::RankDeficient);
  CHECK(testing::error_kind_of([&] { basis.solve(0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("PCR eigenvalues are descending") {
  std::mt19937_64 rng(44);
  const auto d = RegressionDesign::from_returns(testing::random_returns(30, 6, rng), 1.0);
  const PcrBasis basis(d);
  for (Eigen::Index i = 1; i < 6; ++i) CHECK(basis.eigenvalues()(i - 1) >= basis.eigenvalues()(i));
}
