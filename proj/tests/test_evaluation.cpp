#include <doctest.h>

#include "tlqr/errors.hpp"
#include "tlqr/evaluation.hpp"
#include "tlqr/rng.hpp"

using namespace tlqr;

TEST_CASE("squared coefficient error") {
  CoefVector truth(Eigen::Vector3d(1.0, 2.0, 3.0));
  CHECK(mse_beta(truth, truth) == 0.0);
  CoefVector est(Eigen::Vector3d(4.0, 6.0, 3.0));  // difference (3, 4, 0)
  CHECK(mse_beta(est, truth) == doctest::Approx(25.0));
  CoefVector other(Eigen::Vector2d(1.0, 2.0));
  CHECK_THROWS_AS(mse_beta(est, other), DimensionMismatch);
}

TEST_CASE("out-of-sample quantile loss") {
  Dataset holdout;
  holdout.X = Eigen::MatrixXd::Ones(1, 1);
  holdout.y = Eigen::VectorXd::Constant(1, 3.0);
  const QuantileLevel tau(0.8);

  CoefVector perfect(Eigen::VectorXd::Constant(1, 3.0));
  CHECK(oos_quantile_loss(holdout, perfect, tau) == 0.0);

  CoefVector above(Eigen::VectorXd::Constant(1, 5.0));  // residual -2
  CHECK(oos_quantile_loss(holdout, above, tau) == doctest::Approx(0.4));

  SUBCASE("row order does not matter") {
    rng::Stream stream(3);
    Dataset big;
    big.X.resize(10, 1);
    big.y.resize(10);
    for (Eigen::Index i = 0; i < 10; ++i) {
      big.X(i, 0) = stream.normal();
      big.y[i] = stream.normal();
    }
    Dataset rev = big;
    rev.X.colwise().reverseInPlace();
    rev.y.reverseInPlace();
    CoefVector beta(Eigen::VectorXd::Constant(1, 0.7));
    CHECK(oos_quantile_loss(big, beta, tau) ==
          doctest::Approx(oos_quantile_loss(rev, beta, tau)).epsilon(1e-14));
  }
  SUBCASE("empty holdout is an error") {
    Dataset empty;
    CHECK_THROWS_AS(oos_quantile_loss(empty, perfect, tau), EmptyDataset);
  }
}

TEST_CASE("group contributions") {
  GroupMap groups;
  groups.assignment = {{1, "A"}, {2, "B"}};

  SUBCASE("single mass") {
    CoefVector est(Eigen::Vector2d(0.0, -2.5));
    const GroupContributions c = group_contributions(est, groups);
    CHECK(c.share.at("A") == 0.0);
    CHECK(c.share.at("B") == 1.0);
    CHECK(!c.zero_coefficient);
  }
  SUBCASE("symmetric split and scale invariance") {
    CoefVector est(Eigen::Vector2d(1.0, -1.0));
    const GroupContributions c = group_contributions(est, groups);
    CHECK(c.share.at("A") == doctest::Approx(0.5));
    CHECK(c.share.at("B") == doctest::Approx(0.5));

    CoefVector scaled(Eigen::Vector2d(42.0, -42.0));
    const GroupContributions cs = group_contributions(scaled, groups);
    CHECK(cs.share.at("A") == doctest::Approx(c.share.at("A")));
  }
  SUBCASE("zero estimate warns instead of throwing") {
    const GroupContributions c =
        group_contributions(CoefVector::zeros(2), groups);
    CHECK(c.zero_coefficient);
    CHECK(c.share.at("A") == 0.0);
    CHECK(c.share.at("B") == 0.0);
  }
  SUBCASE("uncovered index is an error") {
    CoefVector est(Eigen::Vector3d(1.0, 2.0, 3.0));
    CHECK_THROWS_AS(group_contributions(est, groups), MissingCategory);
  }
  SUBCASE("shares sum to one on random vectors") {
    rng::Stream stream(9);
    GroupMap three;
    three.assignment = {{1, "A"}, {2, "B"}, {3, "B"}, {4, "C"}, {5, "A"}};
    for (int rep = 0; rep < 20; ++rep) {
      Eigen::VectorXd v(5);
      for (Eigen::Index j = 0; j < 5; ++j) v[j] = stream.normal();
      const GroupContributions c = group_contributions(CoefVector(v), three);
      double total = 0.0;
      for (const auto& [cat, share] : c.share) total += share;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("detection accuracy") {
  const InformativeSet both(std::vector<int>{1, 2});
  const InformativeSet one(std::vector<int>{1});

  auto [exact1, j1] = detection_accuracy(both, both);
  CHECK(exact1);
  CHECK(j1 == 1.0);

  auto [exact2, j2] = detection_accuracy(one, both);
  CHECK(!exact2);
  CHECK(j2 == doctest::Approx(0.5));

  auto [exact3, j3] =
      detection_accuracy(InformativeSet::empty(), InformativeSet::empty());
  CHECK(exact3);
  CHECK(j3 == 1.0);
}

TEST_CASE("method names round-trip") {
  for (Method m : {Method::TargetOnly, Method::Oracle, Method::Naive,
                   Method::Pseudo, Method::TransLasso})
    CHECK(method_from_name(method_name(m)) == m);
  CHECK(method_from_name("target-only") == Method::TargetOnly);
  CHECK_THROWS_AS(method_from_name("nope"), InvalidArgument);
}
