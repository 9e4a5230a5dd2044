#include "support.hpp"

using namespace mlport;
using Catch::Approx;

TEST_CASE("moments of a constant column") {
  Eigen::MatrixXd x(2, 1);
  x << 1, 1;
  const auto mom = compute_moments(x);
  CHECK(mom.mean(0) == Approx(1.0));
  CHECK(std::abs(mom.cov(0, 0)) < 1e-15);
  CHECK(mom.n_obs == 2);
}

TEST_CASE("moments of a symmetric pair") {
  Eigen::MatrixXd x(2, 1);
  x << 1, -1;
  const auto mom = compute_moments(x);
  CHECK(std::abs(mom.mean(0)) < 1e-15);
  CHECK(mom.cov(0, 0) == Approx(1.0));
}

TEST_CASE("moments of a 3x2 panel by hand") {
  Eigen::MatrixXd x(3, 2);
  x << 1, 0, 0, 1, 1, 1;
  const auto mom = compute_moments(x);
  CHECK(mom.mean(0) == Approx(2.0 / 3.0));
  CHECK(mom.mean(1) == Approx(2.0 / 3.0));
  CHECK(mom.cov(0, 0) == Approx(2.0 / 9.0));
  CHECK(mom.cov(1, 1) == Approx(2.0 / 9.0));
  CHECK(mom.cov(0, 1) == Approx(-1.0 / 9.0));
  CHECK(mom.cov(1, 0) == Approx(-1.0 / 9.0));
  CHECK(mom.gram(0, 0) == Approx(2.0));
  CHECK(mom.gram(0, 1) == Approx(1.0));
}

TEST_CASE("gram and covariance agree on random panels") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 100; ++rep) {
    std::uniform_int_distribution<int> dm(1, 8), dn(1, 50);
    const int m = dm(rng), n = dn(rng);
    const Eigen::MatrixXd x = testing::gaussian(n, m, rng);
    const auto mom = compute_moments(x);
    const Eigen::MatrixXd rebuilt = static_cast<double>(n) * (mom.cov + mom.mean * mom.mean.transpose());
    CHECK(testing::max_abs_diff(rebuilt, mom.gram) < 1e-10);
    CHECK(testing::max_abs_diff(mom.gram, x.transpose() * x) < 1e-12);
  }
}

TEST_CASE("moments are permutation equivariant") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd x = testing::gaussian(20, 5, rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> p(5);
  p.indices() << 3, 0, 4, 1, 2;
  const auto a = compute_moments(x);
  const auto b = compute_moments(Eigen::MatrixXd(x * p));
  CHECK(testing::max_abs_diff(p.transpose() * a.mean, b.mean) < 1e-14);
  CHECK(testing::max_abs_diff(p.transpose() * a.cov * p, b.cov) < 1e-14);
}

TEST_CASE("relative weights") {
  CHECK(testing::max_abs_diff(relative_weights(Eigen::Vector2d(2, 2)), Eigen::Vector2d(0.5, 0.5)) < 1e-15);
  CHECK(testing::max_abs_diff(relative_weights(Eigen::Vector2d(1, -3)), Eigen::Vector2d(-0.5, 1.5)) < 1e-15);
  CHECK(testing::error_kind_of([] { relative_weights(Eigen::Vector2d(1, -1)); }) == ErrorKind::DegenerateNormalization);
}

TEST_CASE("relative weights are scale invariant") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::VectorXd theta = testing::gaussian(6, 1, rng).col(0).array() + 0.5;
    for (double c : {-3.0, 0.25, 7.0}) {
      CHECK(testing::max_abs_diff(relative_weights(Eigen::VectorXd(c * theta)), relative_weights(theta)) < 1e-12);
    }
  }
}

TEST_CASE("weight vector keeps the cash position") {
  WeightVector w{Eigen::Vector2d(0.3, 0.5), {"a", "b"}};
  CHECK(w.risk_free_position() == Approx(0.2));
}

TEST_CASE("returns matrix validation") {
  Eigen::MatrixXd x(2, 2);
  x << 1, 2, 3, 4;
  const ReturnsMatrix r(x);
  CHECK(r.asset_labels() == std::vector<std::string>{"A1", "A2"});
  CHECK(r.period_index() == std::vector<std::string>{"1", "2"});
  CHECK(testing::error_kind_of([&] { ReturnsMatrix(x, {"a", "a"}, {"1", "2"}); }) == ErrorKind::DuplicateAssetLabel);
  CHECK(testing::error_kind_of([&] { ReturnsMatrix(x, {"a", "b"}, {"2", "1"}); }) == ErrorKind::InvalidArgument);
  // numeric labels compare as numbers, so 9 < 10
  CHECK_NOTHROW(ReturnsMatrix(x, {"a", "b"}, {"9", "10"}));
  Eigen::MatrixXd bad = x;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK(testing::error_kind_of([&] { ReturnsMatrix{bad}; }) == ErrorKind::InvalidArgument);
}

TEST_CASE("population spec") {
  const PopulationSpec pop(Eigen::VectorXd::Constant(1, 0.1), Eigen::MatrixXd::Constant(1, 1, 0.04), 1.0);
  CHECK(pop.second_moment()(0, 0) == Approx(0.05));
  const auto via_alpha = PopulationSpec::from_risk_aversion(pop.mu(), pop.sigma(), 2.0, 0.1);
  CHECK(via_alpha.r_bar() == Approx(0.4));
  CHECK(testing::error_kind_of([] {
          PopulationSpec(Eigen::Vector2d(0, 0), Eigen::Matrix2d::Ones(), 1.0);
        }) == ErrorKind::SingularPopulation);
  CHECK(testing::error_kind_of([&] { PopulationSpec(pop.mu(), pop.sigma(), 0.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("seed derivation is stable and path sensitive") {
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
  CHECK(stable_hash("") == 0xcbf29ce484222325ull);
  CHECK(stable_hash("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("sampler reproduces and converges") {
  const PopulationSpec diag(Eigen::VectorXd::Zero(3), Eigen::Vector3d(0.01, 0.04, 0.09).asDiagonal(), 1.0);
  const Eigen::MatrixXd a = sample_returns_matrix(diag, 100000, 9);
  const Eigen::MatrixXd b = sample_returns_matrix(diag, 100000, 9);
  CHECK(a == b);
  const Eigen::VectorXd mean = a.colwise().mean();
  for (int j = 0; j < 3; ++j) CHECK(std::abs(mean(j)) < 4.0 * std::sqrt(diag.sigma()(j, j)) / std::sqrt(100000.0));

  const PopulationSpec one(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 0.04), 1.0);
  const auto r = sample_returns(one, 100000, 4);
  const double var = compute_moments(r).cov(0, 0);
  CHECK(var > 0.03);
  CHECK(var < 0.05);
}

TEST_CASE("parallel_for fills every slot regardless of worker count") {
  for (std::size_t threads : {1u, 2u, 7u}) {
    std::vector<int> out(100, 0);
    parallel_for(out.size(), threads, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));
  }
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 4) throw Error(ErrorKind::InvalidArgument, "boom");
                  }),
                  Error);
}
