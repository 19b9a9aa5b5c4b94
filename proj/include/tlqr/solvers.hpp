#pragma once

#include <cstdint>
#include <vector>

#include "tlqr/types.hpp"

namespace tlqr {

struct QrSolverConfig {
  double lambda = 0.0;
  int max_iter = 10000;
  double tol = 1e-7;
  double admm_rho = 1.0;
  double zero_threshold = 1e-8;
};

struct LassoSolverConfig {
  double lambda = 0.0;
  int max_iter = 10000;
  double tol = 1e-7;
  double zero_threshold = 1e-8;
  bool track_objective = false;  // record per-sweep objective values
};

struct SolveReport {
  CoefVector coef;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // only filled when tracking
};

// Check loss rho_tau(u) = u * (tau - 1{u <= 0}).
double pinball_loss(double u, QuantileLevel tau);

// Mean check loss of predictions X*beta against y.
double mean_pinball_loss(const Dataset& d, const Eigen::VectorXd& beta,
                         QuantileLevel tau);

// (1/n) sum rho_tau(y_i - x_i'beta) + lambda * ||beta||_1
double qr_objective(const Dataset& d, QuantileLevel tau,
                    const Eigen::VectorXd& beta, double lambda);

// (1/(2n)) ||y - X beta||^2 + lambda * ||beta||_1
double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double lambda);

// l1-penalized quantile regression via ADMM with the residual split
// r = y - X beta and a consensus copy of beta for the penalty. The
// (X'X + I) factorization is cached, so one solver instance can sweep a
// lambda path cheaply with warm starts.
class QrLassoSolver {
 public:
  QrLassoSolver(const Dataset& d, QuantileLevel tau);

  // warm = true continues from the state left by the previous solve call.
  SolveReport solve(const QrSolverConfig& cfg, bool warm = false);

 private:
  const Dataset& data_;
  QuantileLevel tau_;
  Eigen::LLT<Eigen::MatrixXd> fac_;  // X'X + mu I
  double mu_ = 1.0;
  double y_norm_;
  // ADMM state, kept across calls for warm starts
  Eigen::VectorXd beta_, r_, z_, u_, w_;
  double rho_ = 0.0;
  bool has_state_ = false;
};

SolveReport solve_qr_lasso(const Dataset& d, QuantileLevel tau,
                           const QrSolverConfig& cfg);

// l1-penalized least squares via cyclic coordinate descent on the Gram
// matrix. Convergence when the largest coordinate change in a sweep falls
// below tol.
class LassoSolver {
 public:
  LassoSolver(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

  SolveReport solve(const LassoSolverConfig& cfg,
                    const Eigen::VectorXd* warm_start = nullptr);

 private:
  const Eigen::MatrixXd& X_;
  const Eigen::VectorXd& y_;
  Eigen::MatrixXd gram_;  // X'X / n
  Eigen::VectorXd xty_;   // X'y / n
};

SolveReport solve_lasso_ls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const LassoSolverConfig& cfg);

// Grid of 30 log-spaced values on [1e-3, 1] * sqrt(log(p v n) / n).
std::vector<double> default_lambda0_grid(Eigen::Index n, Eigen::Index p);

// Picks the grid lambda minimizing mean held-out check loss. Fold
// assignment shuffles indices with the stream seeded by fold_seed and cuts
// them into `folds` contiguous blocks; ties break toward the larger lambda.
double cross_validate_lambda0(const Dataset& d, QuantileLevel tau,
                              const std::vector<double>& grid, int folds,
                              std::uint64_t fold_seed,
                              const QrSolverConfig& base_cfg = QrSolverConfig{});

}  // namespace tlqr
