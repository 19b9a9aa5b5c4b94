#include "tlqr/solvers.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "tlqr/errors.hpp"
#include "tlqr/rng.hpp"

namespace tlqr {

namespace {

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// Proximal operator of alpha * rho_tau applied elementwise.
inline double prox_pinball(double v, double alpha, double tau) {
  const double up = alpha * tau;
  const double lo = -alpha * (1.0 - tau);
  if (v > up) return v - up;
  if (v < lo) return v - lo;
  return 0.0;
}

Eigen::VectorXd hard_zero(Eigen::VectorXd beta, double threshold) {
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (std::abs(beta[j]) < threshold) beta[j] = 0.0;
  return beta;
}

void check_qr_config(const QrSolverConfig& cfg) {
  if (cfg.lambda < 0.0) throw InvalidArgument("lambda must be >= 0");
  if (cfg.max_iter < 1) throw InvalidArgument("max_iter must be positive");
  if (!(cfg.tol > 0.0) || !(cfg.zero_threshold > 0.0) || !(cfg.admm_rho > 0.0))
    throw InvalidArgument("tol, zero_threshold and admm_rho must be > 0");
}

void check_lasso_config(const LassoSolverConfig& cfg) {
  if (cfg.lambda < 0.0) throw InvalidArgument("lambda must be >= 0");
  if (cfg.max_iter < 1) throw InvalidArgument("max_iter must be positive");
  if (!(cfg.tol > 0.0) || !(cfg.zero_threshold > 0.0))
    throw InvalidArgument("tol and zero_threshold must be > 0");
}

}  // namespace

double pinball_loss(double u, QuantileLevel tau) {
  const double t = tau.value();
  return u > 0.0 ? t * u : (t - 1.0) * u;
}

double mean_pinball_loss(const Dataset& d, const Eigen::VectorXd& beta,
                         QuantileLevel tau) {
  const Eigen::VectorXd r = d.y - d.X * beta;
  double s = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) s += pinball_loss(r[i], tau);
  return s / static_cast<double>(r.size());
}

double qr_objective(const Dataset& d, QuantileLevel tau,
                    const Eigen::VectorXd& beta, double lambda) {
  return mean_pinball_loss(d, beta, tau) + lambda * beta.lpNorm<1>();
}

double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double lambda) {
  const double n = static_cast<double>(X.rows());
  return (y - X * beta).squaredNorm() / (2.0 * n) + lambda * beta.lpNorm<1>();
}

QrLassoSolver::QrLassoSolver(const Dataset& d, QuantileLevel tau)
    : data_(d), tau_(tau) {
  validate_dataset(d);
  const Eigen::Index p = d.p();
  // The consensus constraint carries weight mu comparable to the average
  // diagonal of X'X, so both splitting blocks see similar curvature in the
  // beta step. Without it the identity block is negligible against X'X and
  // the l1 consensus converges extremely slowly.
  mu_ = (d.X.transpose() * d.X).trace() / static_cast<double>(p);
  if (!(mu_ > 0.0)) mu_ = 1.0;
  Eigen::MatrixXd M = mu_ * Eigen::MatrixXd::Identity(p, p);
  M.noalias() += d.X.transpose() * d.X;
  fac_.compute(M);
  y_norm_ = d.y.norm();
}

SolveReport QrLassoSolver::solve(const QrSolverConfig& cfg, bool warm) {
  check_qr_config(cfg);
  const Eigen::MatrixXd& X = data_.X;
  const Eigen::VectorXd& y = data_.y;
  const Eigen::Index n = data_.n();
  const Eigen::Index p = data_.p();
  const double tau = tau_.value();
  const double mu = mu_;

  if (!warm || !has_state_) {
    beta_ = Eigen::VectorXd::Zero(p);
    r_ = y;
    z_ = Eigen::VectorXd::Zero(p);
    u_ = Eigen::VectorXd::Zero(n);
    w_ = Eigen::VectorXd::Zero(p);
    rho_ = cfg.admm_rho;
  }

  Eigen::VectorXd xb(n), r_prev(n), z_prev(p), rhs(p), dual(p);

  const double sqrt_np = std::sqrt(static_cast<double>(n + p));
  const double sqrt_p = std::sqrt(static_cast<double>(p));

  int iter = 0;
  bool converged = false;
  for (iter = 1; iter <= cfg.max_iter; ++iter) {
    // beta step: (X'X + mu I) beta = X'(y - r - u) + mu (z - w)
    rhs.noalias() = X.transpose() * (y - r_ - u_);
    rhs += mu * (z_ - w_);
    beta_ = fac_.solve(rhs);
    xb.noalias() = X * beta_;

    r_prev = r_;
    z_prev = z_;

    // residual block: prox of the check loss
    const double alpha = 1.0 / (static_cast<double>(n) * rho_);
    for (Eigen::Index i = 0; i < n; ++i)
      r_[i] = prox_pinball(y[i] - xb[i] - u_[i], alpha, tau);
    u_ += xb + r_ - y;

    // consensus block: soft threshold against the mu-weighted penalty
    const double thresh = cfg.lambda / (rho_ * mu);
    for (Eigen::Index j = 0; j < p; ++j)
      z_[j] = soft_threshold(beta_[j] + w_[j], thresh);
    w_ += beta_ - z_;

    const double pri_norm = std::sqrt((xb + r_ - y).squaredNorm() +
                                      mu * (beta_ - z_).squaredNorm());
    dual.noalias() = X.transpose() * (r_ - r_prev);
    dual -= mu * (z_ - z_prev);
    const double dual_norm = rho_ * dual.norm();

    const double ax =
        std::sqrt(xb.squaredNorm() + mu * beta_.squaredNorm());
    const double bz = std::sqrt(r_.squaredNorm() + mu * z_.squaredNorm());
    const double eps_pri =
        sqrt_np * cfg.tol + cfg.tol * std::max({ax, bz, y_norm_});
    Eigen::VectorXd atu = X.transpose() * u_ + mu * w_;
    const double eps_dual = sqrt_p * cfg.tol + cfg.tol * rho_ * atu.norm();

    if (pri_norm <= eps_pri && dual_norm <= eps_dual) {
      converged = true;
      break;
    }

    // residual balancing, frozen after the early iterations so the fixed
    // penalty convergence guarantee applies
    if (iter % 10 == 0 && iter <= 1000) {
      if (pri_norm > 5.0 * dual_norm) {
        rho_ *= 2.0;
        u_ *= 0.5;
        w_ *= 0.5;
      } else if (dual_norm > 5.0 * pri_norm) {
        rho_ *= 0.5;
        u_ *= 2.0;
        w_ *= 2.0;
      }
    }
  }
  has_state_ = true;

  SolveReport rep;
  rep.coef = CoefVector(hard_zero(z_, cfg.zero_threshold));
  rep.objective = qr_objective(data_, tau_, rep.coef.beta, cfg.lambda);
  rep.iterations = std::min(iter, cfg.max_iter);
  rep.converged = converged;
  return rep;
}

SolveReport solve_qr_lasso(const Dataset& d, QuantileLevel tau,
                           const QrSolverConfig& cfg) {
  QrLassoSolver solver(d, tau);
  return solver.solve(cfg);
}

LassoSolver::LassoSolver(const Eigen::MatrixXd& X, const Eigen::VectorXd& y)
    : X_(X), y_(y) {
  if (X.rows() != y.size())
    throw DimensionMismatch("lasso: X rows and y length differ");
  if (X.rows() == 0 || X.cols() == 0)
    throw EmptyDataset("lasso: empty design matrix");
  const double n = static_cast<double>(X.rows());
  gram_.noalias() = X.transpose() * X;
  gram_ /= n;
  xty_.noalias() = X.transpose() * y;
  xty_ /= n;
}

SolveReport LassoSolver::solve(const LassoSolverConfig& cfg,
                               const Eigen::VectorXd* warm_start) {
  check_lasso_config(cfg);
  const Eigen::Index p = X_.cols();

  Eigen::VectorXd beta;
  Eigen::VectorXd gb;  // gram_ * beta, kept incrementally
  if (warm_start != nullptr && warm_start->size() == p) {
    beta = *warm_start;
    gb.noalias() = gram_ * beta;
  } else {
    beta = Eigen::VectorXd::Zero(p);
    gb = Eigen::VectorXd::Zero(p);
  }

  SolveReport rep;
  double prev_obj = std::numeric_limits<double>::infinity();
  bool converged = false;
  int sweep = 0;
  for (sweep = 1; sweep <= cfg.max_iter; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double gjj = gram_(j, j);
      if (gjj <= 0.0) continue;  // constant-zero column stays at zero
      const double cj = xty_[j] - gb[j] + gjj * beta[j];
      const double bj = soft_threshold(cj, cfg.lambda) / gjj;
      const double delta = bj - beta[j];
      if (delta != 0.0) {
        gb += gram_.col(j) * delta;
        beta[j] = bj;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (cfg.track_objective) {
      const double obj = lasso_objective(X_, y_, beta, cfg.lambda);
      assert(obj <= prev_obj + 1e-10 * (1.0 + std::abs(prev_obj)));
      prev_obj = obj;
      (void)prev_obj;
      rep.objective_trace.push_back(obj);
    }
    if (max_change < cfg.tol) {
      converged = true;
      break;
    }
  }

  rep.coef = CoefVector(hard_zero(std::move(beta), cfg.zero_threshold));
  rep.objective = lasso_objective(X_, y_, rep.coef.beta, cfg.lambda);
  rep.iterations = std::min(sweep, cfg.max_iter);
  rep.converged = converged;
  return rep;
}

SolveReport solve_lasso_ls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const LassoSolverConfig& cfg) {
  LassoSolver solver(X, y);
  return solver.solve(cfg);
}

std::vector<double> default_lambda0_grid(Eigen::Index n, Eigen::Index p) {
  const double base =
      std::sqrt(std::log(static_cast<double>(std::max(n, p))) /
                static_cast<double>(n));
  std::vector<double> grid(30);
  for (int i = 0; i < 30; ++i)
    grid[static_cast<std::size_t>(i)] =
        base * std::pow(10.0, -3.0 + 3.0 * i / 29.0);
  return grid;
}

double cross_validate_lambda0(const Dataset& d, QuantileLevel tau,
                              const std::vector<double>& grid, int folds,
                              std::uint64_t fold_seed,
                              const QrSolverConfig& base_cfg) {
  validate_dataset(d);
  if (grid.empty()) throw EmptyGrid("lambda grid is empty");
  for (double l : grid)
    if (l < 0.0) throw InvalidArgument("lambda grid values must be >= 0");
  const Eigen::Index n = d.n();
  if (folds < 2 || folds > n)
    throw TooFewSamples("need 2 <= folds <= n, got folds=" +
                        std::to_string(folds) + ", n=" + std::to_string(n));

  // shuffled indices cut into `folds` contiguous blocks
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  rng::Stream stream(fold_seed);
  stream.shuffle(idx);

  std::vector<double> sorted(grid);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());

  std::vector<double> mean_loss(sorted.size(), 0.0);
  for (int f = 0; f < folds; ++f) {
    const Eigen::Index lo = n * f / folds;
    const Eigen::Index hi = n * (f + 1) / folds;
    std::vector<Eigen::Index> test(idx.begin() + lo, idx.begin() + hi);
    std::vector<Eigen::Index> train;
    train.reserve(static_cast<std::size_t>(n - (hi - lo)));
    train.insert(train.end(), idx.begin(), idx.begin() + lo);
    train.insert(train.end(), idx.begin() + hi, idx.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());

    Dataset dtrain{d.X(train, Eigen::all), d.y(train)};
    Dataset dtest{d.X(test, Eigen::all), d.y(test)};

    QrLassoSolver solver(dtrain, tau);  // factorization shared across the path
    for (std::size_t g = 0; g < sorted.size(); ++g) {
      QrSolverConfig cfg = base_cfg;
      cfg.lambda = sorted[g];
      const SolveReport rep = solver.solve(cfg);
      mean_loss[g] += mean_pinball_loss(dtest, rep.coef.beta, tau) /
                      static_cast<double>(folds);
    }
  }

  // descending grid order, strict improvement: ties go to the larger lambda
  std::size_t best = 0;
  for (std::size_t g = 1; g < sorted.size(); ++g)
    if (mean_loss[g] < mean_loss[best]) best = g;
  return sorted[best];
}

}  // namespace tlqr
