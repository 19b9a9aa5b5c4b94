#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "tlqr/errors.hpp"
#include "tlqr/rng.hpp"
#include "tlqr/solvers.hpp"

using namespace tlqr;

namespace {

// Independent oracle: an intercept-only quantile fit attains its minimum at
// one of the response breakpoints, so enumerate them.
double intercept_qr_oracle(const Eigen::VectorXd& y, QuantileLevel tau) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double obj = 0.0;
    for (Eigen::Index j = 0; j < y.size(); ++j)
      obj += pinball_loss(y[j] - y[i], tau);
    best = std::min(best, obj / static_cast<double>(y.size()));
  }
  return best;
}

// Independent oracle: smallest attainable |subgradient| of the penalized
// check-loss objective, coordinate-wise. Residuals within kink_tol of zero
// may take any slope in [tau-1, tau]; zero coefficients any sign in [-1, 1].
double qr_subgradient_gap(const Dataset& d, QuantileLevel tau,
                          const Eigen::VectorXd& beta, double lambda,
                          double kink_tol) {
  const double t = tau.value();
  const double n = static_cast<double>(d.n());
  const Eigen::VectorXd r = d.y - d.X * beta;
  double gap = 0.0;
  for (Eigen::Index j = 0; j < d.p(); ++j) {
    double lo = 0.0, hi = 0.0;
    for (Eigen::Index i = 0; i < d.n(); ++i) {
      const double x = d.X(i, j);
      if (std::abs(r[i]) <= kink_tol) {
        // contribution -x * psi / n with psi in [t-1, t]
        const double a = -x * (t - 1.0) / n;
        const double b = -x * t / n;
        lo += std::min(a, b);
        hi += std::max(a, b);
      } else {
        const double psi = r[i] > 0.0 ? t : t - 1.0;
        lo += -x * psi / n;
        hi += -x * psi / n;
      }
    }
    if (beta[j] != 0.0) {
      const double s = lambda * (beta[j] > 0.0 ? 1.0 : -1.0);
      lo += s;
      hi += s;
    } else {
      lo -= lambda;
      hi += lambda;
    }
    double cj = 0.0;
    if (lo > 0.0) cj = lo;
    if (hi < 0.0) cj = -hi;
    gap = std::max(gap, cj);
  }
  return gap;
}

Dataset random_dataset(rng::Stream& stream, Eigen::Index n, Eigen::Index p) {
  Dataset d;
  d.X.resize(n, p);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) d.X(i, j) = stream.normal();
    d.y[i] = stream.normal();
  }
  return d;
}

}  // namespace

TEST_CASE("pinball loss branches") {
  const QuantileLevel t8(0.8);
  CHECK(pinball_loss(0.0, t8) == 0.0);
  CHECK(pinball_loss(0.0, QuantileLevel(0.3)) == 0.0);
  CHECK(pinball_loss(1.0, t8) == doctest::Approx(0.8));
  CHECK(pinball_loss(-2.0, t8) == doctest::Approx(0.4));
  CHECK(pinball_loss(-1.0, QuantileLevel(0.5)) == doctest::Approx(0.5));
}

TEST_CASE("intercept-only quantile fit reaches the breakpoint optimum") {
  Dataset d;
  d.X = Eigen::MatrixXd::Ones(5, 1);
  d.y.resize(5);
  d.y << 1, 2, 3, 4, 5;

  QrSolverConfig cfg;
  cfg.lambda = 0.0;

  SUBCASE("median") {
    const QuantileLevel tau(0.5);
    const SolveReport rep = solve_qr_lasso(d, tau, cfg);
    CHECK(rep.converged);
    // minimum over breakpoints sits at the sample median, value 0.6
    CHECK(intercept_qr_oracle(d.y, tau) == doctest::Approx(0.6));
    CHECK(rep.objective == doctest::Approx(intercept_qr_oracle(d.y, tau))
                               .epsilon(1e-6));
    CHECK(rep.coef.beta[0] == doctest::Approx(3.0).epsilon(1e-4));
  }
  SUBCASE("tau 0.8") {
    const QuantileLevel tau(0.8);
    const SolveReport rep = solve_qr_lasso(d, tau, cfg);
    CHECK(intercept_qr_oracle(d.y, tau) == doctest::Approx(0.4));
    CHECK(rep.objective == doctest::Approx(0.4).epsilon(1e-6));
    // tau * n is integer here, so every point of [4, 5] is a minimizer
    CHECK(rep.coef.beta[0] >= 4.0 - 1e-4);
    CHECK(rep.coef.beta[0] <= 5.0 + 1e-4);
  }
}

TEST_CASE("large penalty zeroes the quantile fit") {
  rng::Stream stream(314);
  Dataset d = random_dataset(stream, 40, 6);
  const QuantileLevel tau(0.7);

  double col_max = 0.0;
  for (Eigen::Index j = 0; j < d.p(); ++j)
    col_max = std::max(col_max, d.X.col(j).cwiseAbs().sum());
  QrSolverConfig cfg;
  cfg.lambda = 1.5 * col_max / static_cast<double>(d.n()) *
               std::max(tau.value(), 1.0 - tau.value());

  const SolveReport rep = solve_qr_lasso(d, tau, cfg);
  CHECK(rep.coef.beta.isZero(0.0));
  CHECK(rep.coef.sparsity == 0);
  // the origin itself passes the subgradient certificate at this lambda
  CHECK(qr_subgradient_gap(d, tau, Eigen::VectorXd::Zero(d.p()), cfg.lambda,
                           1e-9) == 0.0);
}

TEST_CASE("quantile solver satisfies subgradient and convexity certificates") {
  rng::Stream stream(2718);
  for (int instance = 0; instance < 50; ++instance) {
    const Eigen::Index n = 10 + static_cast<Eigen::Index>(stream.uniform_int(21));
    const Eigen::Index p = 2 + static_cast<Eigen::Index>(stream.uniform_int(9));
    Dataset d = random_dataset(stream, n, p);
    const QuantileLevel tau(0.1 + 0.8 * stream.uniform01());

    QrSolverConfig cfg;
    cfg.lambda = 0.05 * stream.uniform01();
    cfg.tol = 1e-9;
    cfg.max_iter = 200000;
    const SolveReport rep = solve_qr_lasso(d, tau, cfg);
    CHECK(rep.converged);

    const double scale =
        1.0 + d.X.cwiseAbs().colwise().sum().maxCoeff() /
                  static_cast<double>(n);
    const double gap =
        qr_subgradient_gap(d, tau, rep.coef.beta, cfg.lambda, 1e-6);
    CHECK(gap <= 1e-5 * scale);

    // objective at the solution never beats nearby points
    const double obj = qr_objective(d, tau, rep.coef.beta, cfg.lambda);
    for (int dir = 0; dir < 100; ++dir) {
      Eigen::VectorXd step(p);
      for (Eigen::Index j = 0; j < p; ++j) step[j] = stream.normal();
      step.normalize();
      for (double s : {1e-3, 1e-2}) {
        const double other =
            qr_objective(d, tau, rep.coef.beta + s * step, cfg.lambda);
        CHECK(obj <= other + 1e-7);
      }
    }
  }
}

TEST_CASE("quantile solver is deterministic") {
  rng::Stream stream(99);
  Dataset d = random_dataset(stream, 30, 8);
  QrSolverConfig cfg;
  cfg.lambda = 0.02;
  const SolveReport a = solve_qr_lasso(d, QuantileLevel(0.8), cfg);
  const SolveReport b = solve_qr_lasso(d, QuantileLevel(0.8), cfg);
  CHECK(a.coef.beta == b.coef.beta);
  CHECK(a.objective == b.objective);
  CHECK(a.iterations == b.iterations);
  CHECK(a.converged == b.converged);
}

TEST_CASE("lasso on the identity design soft-thresholds") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd y(2);
  y << 3.0, -0.5;
  LassoSolverConfig cfg;
  cfg.lambda = 0.5;
  const SolveReport rep = solve_lasso_ls(X, y, cfg);
  CHECK(rep.coef.beta[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(rep.coef.beta[1] == 0.0);
}

TEST_CASE("unpenalized lasso solves invertible systems") {
  rng::Stream stream(7);
  Eigen::MatrixXd X(4, 4);
  Eigen::VectorXd y(4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    y[i] = stream.normal();
    for (Eigen::Index j = 0; j < 4; ++j) X(i, j) = stream.normal();
  }
  X += 3.0 * Eigen::MatrixXd::Identity(4, 4);  // keep it well conditioned
  LassoSolverConfig cfg;
  cfg.lambda = 0.0;
  cfg.tol = 1e-12;
  const SolveReport rep = solve_lasso_ls(X, y, cfg);
  const Eigen::VectorXd exact = X.lu().solve(y);
  CHECK((rep.coef.beta - exact).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("zero response gives the zero lasso fit") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(6, 3);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(6);
  for (double lambda : {0.0, 0.3}) {
    LassoSolverConfig cfg;
    cfg.lambda = lambda;
    const SolveReport rep = solve_lasso_ls(X, y, cfg);
    CHECK(rep.coef.beta.isZero(0.0));
  }
}

TEST_CASE("lasso matches the closed form on random diagonal designs") {
  rng::Stream stream(555);
  for (int instance = 0; instance < 50; ++instance) {
    const Eigen::Index p = 2 + static_cast<Eigen::Index>(stream.uniform_int(7));
    Eigen::VectorXd diag(p), y(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      diag[j] = 0.5 + stream.uniform01();
      y[j] = 3.0 * stream.normal();
    }
    const Eigen::MatrixXd X = diag.asDiagonal();
    LassoSolverConfig cfg;
    cfg.lambda = 0.4 * stream.uniform01();
    const SolveReport rep = solve_lasso_ls(X, y, cfg);
    // per-coordinate objective (d_j beta_j - y_j)^2 / (2p) + lambda |beta_j|
    const double n = static_cast<double>(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      const double b = diag[j] * y[j] / n;
      const double soft =
          std::max(0.0, std::abs(b) - cfg.lambda) * (b < 0 ? -1.0 : 1.0);
      const double expect = soft / (diag[j] * diag[j] / n);
      CHECK(rep.coef.beta[j] == doctest::Approx(expect).epsilon(1e-6));
    }
  }
}

TEST_CASE("lasso satisfies its stationarity conditions") {
  rng::Stream stream(808);
  for (int instance = 0; instance < 20; ++instance) {
    const Eigen::Index n = 15 + static_cast<Eigen::Index>(stream.uniform_int(20));
    const Eigen::Index p = 3 + static_cast<Eigen::Index>(stream.uniform_int(8));
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y[i] = stream.normal();
      for (Eigen::Index j = 0; j < p; ++j) X(i, j) = stream.normal();
    }
    LassoSolverConfig cfg;
    cfg.lambda = 0.1 * stream.uniform01();
    cfg.tol = 1e-10;
    const SolveReport rep = solve_lasso_ls(X, y, cfg);
    const Eigen::VectorXd grad =
        X.transpose() * (y - X * rep.coef.beta) / static_cast<double>(n);
    for (Eigen::Index j = 0; j < p; ++j) {
      if (rep.coef.beta[j] == 0.0) {
        CHECK(std::abs(grad[j]) <= cfg.lambda + 1e-7);
      } else {
        CHECK(grad[j] == doctest::Approx(cfg.lambda *
                                         (rep.coef.beta[j] > 0 ? 1.0 : -1.0))
                             .epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("lasso objective decreases sweep over sweep") {
  rng::Stream stream(1234);
  Eigen::MatrixXd X(40, 10);
  Eigen::VectorXd y(40);
  for (Eigen::Index i = 0; i < 40; ++i) {
    y[i] = stream.normal();
    for (Eigen::Index j = 0; j < 10; ++j) X(i, j) = stream.normal();
  }
  LassoSolverConfig cfg;
  cfg.lambda = 0.05;
  cfg.track_objective = true;
  const SolveReport rep = solve_lasso_ls(X, y, cfg);
  REQUIRE(rep.objective_trace.size() >= 2);
  for (std::size_t i = 1; i < rep.objective_trace.size(); ++i)
    CHECK(rep.objective_trace[i] <=
          rep.objective_trace[i - 1] + 1e-12 * (1.0 + rep.objective_trace[i - 1]));
}

TEST_CASE("cross-validation selects from the grid deterministically") {
  rng::Stream stream(31);
  Dataset d = random_dataset(stream, 40, 4);
  const QuantileLevel tau(0.5);

  SUBCASE("singleton grid returns its element") {
    CHECK(cross_validate_lambda0(d, tau, {0.37}, 5, 1) == 0.37);
  }
  SUBCASE("same seed gives the same choice") {
    const auto grid = default_lambda0_grid(d.n(), d.p());
    CHECK(cross_validate_lambda0(d, tau, grid, 5, 7) ==
          cross_validate_lambda0(d, tau, grid, 5, 7));
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(cross_validate_lambda0(d, tau, {}, 5, 1), EmptyGrid);
    CHECK_THROWS_AS(cross_validate_lambda0(d, tau, {0.1}, 1, 1),
                    TooFewSamples);
    CHECK_THROWS_AS(cross_validate_lambda0(d, tau, {0.1}, 41, 1),
                    TooFewSamples);
    CHECK_THROWS_AS(cross_validate_lambda0(d, tau, {-0.1}, 5, 1),
                    InvalidArgument);
  }
}

TEST_CASE("cross-validation prefers heavy penalties on pure noise") {
  const QuantileLevel tau(0.5);
  const auto grid = default_lambda0_grid(200, 5);
  int picked_max = 0;
  for (int seed = 0; seed < 20; ++seed) {
    rng::Stream stream(static_cast<std::uint64_t>(seed) + 1000);
    Dataset d = random_dataset(stream, 200, 5);  // y unrelated to X
    const double chosen = cross_validate_lambda0(d, tau, grid, 5,
                                                 static_cast<std::uint64_t>(seed));
    if (chosen == *std::max_element(grid.begin(), grid.end())) ++picked_max;
  }
  CHECK(picked_max >= 18);
}

TEST_CASE("cross-validation prefers light penalties on strong signal") {
  const QuantileLevel tau(0.5);
  const auto grid = default_lambda0_grid(200, 5);
  const double midpoint = 0.5 * (grid.front() + grid.back());
  int picked_low = 0;
  for (int seed = 0; seed < 20; ++seed) {
    rng::Stream stream(static_cast<std::uint64_t>(seed) + 5000);
    Dataset d = random_dataset(stream, 200, 5);
    Eigen::VectorXd beta(5);
    beta << 2, -3, 1.5, 0.5, -1;
    for (Eigen::Index i = 0; i < d.n(); ++i)
      d.y[i] = d.X.row(i).dot(beta) + 1e-3 * stream.normal();
    const double chosen = cross_validate_lambda0(d, tau, grid, 5,
                                                 static_cast<std::uint64_t>(seed));
    if (chosen < midpoint) ++picked_low;
  }
  CHECK(picked_low >= 18);
}

TEST_CASE("default lambda grid brackets the reference scale") {
  const auto grid = default_lambda0_grid(150, 150);
  CHECK(grid.size() == 30);
  const double base = std::sqrt(std::log(150.0) / 150.0);
  CHECK(grid.front() == doctest::Approx(1e-3 * base));
  CHECK(grid.back() == doctest::Approx(base));
}
