#include <doctest.h>

#include <cmath>
#include <set>

#include "tlqr/errors.hpp"
#include "tlqr/rng.hpp"
#include "tlqr/surrogate.hpp"

using namespace tlqr;

namespace {

// Adaptive Simpson quadrature, the independent check for the kernel mass.
double simpson(double (*f)(double), double a, double b, double fa, double fb,
               double fm, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, fm, flm, eps / 2.0, depth - 1) +
         simpson(f, m, b, fm, fb, frm, eps / 2.0, depth - 1);
}

double integrate(double (*f)(double), double a, double b, double eps) {
  const double m = 0.5 * (a + b);
  return simpson(f, a, b, f(a), f(b), f(m), eps, 40);
}

}  // namespace

TEST_CASE("kernel values at reference points") {
  CHECK(kernel_G(0.0) == doctest::Approx(105.0 / 64.0).epsilon(1e-15));
  CHECK(kernel_G(0.0) == doctest::Approx(1.640625));
  CHECK(kernel_G(1.5) == 0.0);
  CHECK(kernel_G(-1.5) == 0.0);
  CHECK(kernel_G(1.0) == 0.0);
  // direct polynomial evaluation at 1/2: 945/4096
  CHECK(kernel_G(0.5) == doctest::Approx(945.0 / 4096.0).epsilon(1e-15));
  CHECK(kernel_G(0.5) == doctest::Approx(0.2307129).epsilon(1e-6));
  CHECK(kernel_G(-0.5) == kernel_G(0.5));
}

TEST_CASE("kernel integrates to one and vanishes smoothly at the edges") {
  const double mass = integrate(&kernel_G, -1.0, 1.0, 1e-12);
  CHECK(std::abs(mass - 1.0) <= 1e-8);

  // coefficient identities: value and slope are zero at u = 1
  CHECK(-315.0 / 64.0 + 735.0 / 64.0 - 525.0 / 64.0 + 105.0 / 64.0 == 0.0);
  CHECK(-6.0 * 315.0 / 64.0 + 4.0 * 735.0 / 64.0 - 2.0 * 525.0 / 64.0 == 0.0);
  // finite differences agree just inside the support
  const double h = 1e-7;
  CHECK(std::abs(kernel_G(1.0 - h)) < 1e-10);
  CHECK(std::abs((kernel_G(1.0 - h) - kernel_G(1.0 - 2 * h)) / h) < 1e-5);
}

TEST_CASE("bandwidth rules") {
  SUBCASE("oracle formula") {
    const double h = bandwidth(BandwidthRule::oracle_step(), 20, 150);
    const double ln = std::log(150.0);
    const double expect =
        std::sqrt(20.0 * ln / 150.0) + std::pow(20.0, 1.5) * ln / 1500.0;
    CHECK(h == doctest::Approx(expect).epsilon(1e-14));
  }
  SUBCASE("fixed passthrough") {
    CHECK(bandwidth(BandwidthRule::fixed(0.3), 5, 100) == 0.3);
    CHECK_THROWS_AS(bandwidth(BandwidthRule::fixed(0.0), 5, 100),
                    InvalidArgument);
  }
  SUBCASE("small-sample sanity") {
    const double h = bandwidth(BandwidthRule::oracle_step(), 1, 8);
    CHECK(h > 0.0);
    CHECK(h < 1.0);
    CHECK_THROWS_AS(bandwidth(BandwidthRule::oracle_step(), 1, 1),
                    InvalidSize);
  }
  SUBCASE("detection split uses half samples") {
    const double h = bandwidth(BandwidthRule::detection_split(), 20, 150);
    const double half = 75.0;
    const double ln = std::log(half);
    const double expect =
        std::sqrt(20.0 * ln / half) + std::pow(20.0, 1.5) * ln / (5.0 * 150.0);
    CHECK(h == doctest::Approx(expect).epsilon(1e-14));
    CHECK_THROWS_AS(bandwidth(BandwidthRule::detection_split(), 2, 3),
                    InvalidSize);
  }
  SUBCASE("plug-in sparsity") {
    CoefVector pilot(Eigen::Vector3d(1.0, 0.0, -2.0));
    BandwidthRule rule;
    CHECK(plug_in_sparsity(rule, pilot) == 2);
    rule.sparsity_override = 20;
    CHECK(plug_in_sparsity(rule, pilot) == 20);
    CHECK(plug_in_sparsity(BandwidthRule{}, CoefVector::zeros(3)) == 1);
  }
}

TEST_CASE("density estimate at zero") {
  const KernelSpec kernel = default_kernel();
  Dataset d;
  d.X = Eigen::MatrixXd::Ones(4, 1);
  CoefVector beta(Eigen::VectorXd::Constant(1, 2.0));  // fitted values all 2

  SUBCASE("zero residuals give the kernel peak") {
    d.y = Eigen::VectorXd::Constant(4, 2.0);
    const DensityEstimate est = estimate_density_at_zero(d, beta, 1.0, kernel);
    CHECK(est.f0 == doctest::Approx(1.640625).epsilon(1e-15));
    CHECK(est.usable);
  }
  SUBCASE("residuals outside the support are invisible") {
    d.y = Eigen::VectorXd::Constant(4, 5.0);  // residuals 3 >> h
    const DensityEstimate est = estimate_density_at_zero(d, beta, 1.0, kernel);
    CHECK(est.f0 == 0.0);
    CHECK(!est.usable);
  }
  SUBCASE("mixed residuals sum the kernel values") {
    const double h = 0.2;
    d.y.resize(4);
    d.y << 2.0, 2.0 + 0.5 * h, 2.0 - 0.5 * h, 2.0 + 2.0 * h;
    const DensityEstimate est = estimate_density_at_zero(d, beta, h, kernel);
    const double expect =
        (1.640625 + 2.0 * 945.0 / 4096.0 + 0.0) / (4.0 * 0.2);
    CHECK(est.f0 == doctest::Approx(expect).epsilon(1e-12));
    CHECK(est.f0 == doctest::Approx(2.6275635).epsilon(1e-7));
  }
  SUBCASE("invariant under permutation of observations") {
    rng::Stream stream(4);
    Dataset big;
    big.X = Eigen::MatrixXd::Ones(20, 1);
    big.y.resize(20);
    for (Eigen::Index i = 0; i < 20; ++i) big.y[i] = 2.0 + 0.3 * stream.normal();
    const DensityEstimate a =
        estimate_density_at_zero(big, beta, 0.5, kernel);
    Dataset perm = big;
    perm.y.reverseInPlace();
    perm.X = big.X;  // all-ones, unchanged by any permutation
    const DensityEstimate b =
        estimate_density_at_zero(perm, beta, 0.5, kernel);
    CHECK(a.f0 == doctest::Approx(b.f0).epsilon(1e-14));
  }
  SUBCASE("half-sample convention matches the plain estimate on halves") {
    d.y = Eigen::VectorXd::Constant(4, 2.0);
    const DensityEstimate whole =
        estimate_density_at_zero(d, beta, 1.0, kernel, 1);
    const DensityEstimate half =
        estimate_density_at_zero(d, beta, 1.0, kernel, 2);
    CHECK(half.f0 == doctest::Approx(whole.f0).epsilon(1e-15));
    CHECK_THROWS_AS(estimate_density_at_zero(d, beta, 1.0, kernel, 3),
                    InvalidArgument);
  }
}

TEST_CASE("surrogate responses take exactly two offsets") {
  const QuantileLevel tau(0.5);
  Dataset d;
  d.X = Eigen::MatrixXd::Ones(3, 1);
  d.y.resize(3);
  d.y << 1.0, 3.0, 2.0;  // residuals -1, +1, 0 around fitted value 2
  CoefVector beta(Eigen::VectorXd::Constant(1, 2.0));
  DensityEstimate f0{0.5, 1.0, true};

  const Eigen::VectorXd ytilde = surrogate_responses(d, beta, f0, tau);
  CHECK(ytilde[0] == doctest::Approx(1.0));  // indicator 1: 2 - 2*(0.5)
  CHECK(ytilde[1] == doctest::Approx(3.0));  // indicator 0: 2 + 2*0.5
  CHECK(ytilde[2] == doctest::Approx(1.0));  // boundary residual counts as <= 0

  SUBCASE("degenerate density is rejected") {
    DensityEstimate bad{1e-6, 1.0, false};
    CHECK_THROWS_AS(surrogate_responses(d, beta, bad, tau), DegenerateDensity);
  }
}

TEST_CASE("surrogate offsets concentrate on two values with the right mix") {
  rng::Stream stream(77);
  const QuantileLevel tau(0.8);
  Dataset d;
  const Eigen::Index n = 400;
  d.X.resize(n, 2);
  d.y.resize(n);
  Eigen::VectorXd b(2);
  b << 1.0, -0.5;
  for (Eigen::Index i = 0; i < n; ++i) {
    d.X(i, 0) = stream.normal();
    d.X(i, 1) = stream.normal();
    d.y[i] = d.X.row(i).dot(b) + stream.normal();
  }
  CoefVector beta(b);
  DensityEstimate f0{0.4, 1.0, true};
  const Eigen::VectorXd ytilde = surrogate_responses(d, beta, f0, tau);
  const Eigen::VectorXd fitted = d.X * b;

  std::set<double> offsets;
  Eigen::Index nonpositive = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    offsets.insert(ytilde[i] - fitted[i]);
    if (d.y[i] - fitted[i] <= 0.0) ++nonpositive;
  }
  REQUIRE(offsets.size() <= 2);
  const double low = -(1.0 - tau.value()) / f0.f0;
  const double high = tau.value() / f0.f0;
  Eigen::Index low_count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double off = ytilde[i] - fitted[i];
    CHECK((off == doctest::Approx(low) || off == doctest::Approx(high)));
    if (off < 0.0) ++low_count;
  }
  CHECK(low_count == nonpositive);
}
