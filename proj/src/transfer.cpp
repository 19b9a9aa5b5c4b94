#include "tlqr/transfer.hpp"

#include <cmath>
#include <string>

#include "tlqr/errors.hpp"

namespace tlqr {

ResolvedLambdas resolve_lambdas(const StudyCollection& c,
                                const InformativeSet& A,
                                const TransferConfig& cfg) {
  const double p = static_cast<double>(c.p());
  const double n0 = static_cast<double>(c.target.n());

  ResolvedLambdas out;
  if (cfg.lambda0) {
    out.lambda0 = *cfg.lambda0;
  } else {
    const std::vector<double> grid =
        cfg.cv_grid.empty() ? default_lambda0_grid(c.target.n(), c.p())
                            : cfg.cv_grid;
    out.lambda0 = cross_validate_lambda0(c.target, c.tau, grid, cfg.cv_folds,
                                         cfg.cv_seed, cfg.qr_cfg);
  }

  if (cfg.lambda1) {
    out.lambda1 = *cfg.lambda1;
  } else {
    double n_total = n0;
    double n_max = n0;
    for (int k : A.members()) {
      const double nk = static_cast<double>(c.study(k).n());
      n_total += nk;
      n_max = std::max(n_max, nk);
    }
    out.lambda1 = std::sqrt(2.0 * std::log(std::max(p, n_max)) / n_total);
  }

  out.lambda2 = cfg.lambda2
                    ? *cfg.lambda2
                    : std::sqrt(2.0 * std::log(std::max(p, n0)) / n0);
  return out;
}

TransferFit fit_target_only(const StudyCollection& c,
                            const TransferConfig& cfg) {
  validate_collection(c);
  const ResolvedLambdas lambdas =
      resolve_lambdas(c, InformativeSet::empty(), cfg);

  QrSolverConfig qr = cfg.qr_cfg;
  qr.lambda = lambdas.lambda0;
  const SolveReport rep = solve_qr_lasso(c.target, c.tau, qr);

  TransferFit fit;
  fit.beta_hat = rep.coef;
  fit.beta_fused = rep.coef;
  fit.delta_hat = CoefVector::zeros(c.p());
  fit.initial_fits[0] = rep.coef;
  fit.set_used = InformativeSet::empty();
  fit.lambdas = lambdas;
  fit.all_converged = rep.converged;
  return fit;
}

TransferFit fit_oracle(const StudyCollection& c, const InformativeSet& A,
                       const TransferConfig& cfg) {
  validate_collection(c);
  if (!A.members().empty() && A.members().back() > c.num_sources())
    throw InvalidArgument("informative set references source " +
                          std::to_string(A.members().back()) + " but only " +
                          std::to_string(c.num_sources()) + " exist");

  const ResolvedLambdas lambdas = resolve_lambdas(c, A, cfg);

  // studies involved: target first, then sources by ascending index
  std::vector<int> studies{0};
  studies.insert(studies.end(), A.members().begin(), A.members().end());

  TransferFit fit;
  fit.set_used = A;
  fit.lambdas = lambdas;

  // Step 1: per-study pilot fits; Step 2: densities and surrogates
  Eigen::Index total_rows = 0;
  std::map<int, Eigen::VectorXd> surrogates;
  for (int k : studies) {
    const Dataset& d = c.study(k);
    QrSolverConfig qr = cfg.qr_cfg;
    qr.lambda = lambdas.lambda0;
    const SolveReport rep = solve_qr_lasso(d, c.tau, qr);
    fit.all_converged = fit.all_converged && rep.converged;
    fit.initial_fits[k] = rep.coef;

    const int s = plug_in_sparsity(cfg.bandwidth_rule, rep.coef);
    const double h = bandwidth(cfg.bandwidth_rule, s, d.n());
    const DensityEstimate dens =
        estimate_density_at_zero(d, rep.coef, h, cfg.kernel);
    fit.densities[k] = dens;
    if (!dens.usable)
      throw DegenerateDensity("study " + std::to_string(k) +
                                  ": error density at zero is degenerate (" +
                                  std::to_string(dens.f0) + ")",
                              k);
    surrogates[k] = surrogate_responses(d, rep.coef, dens, c.tau);
    total_rows += d.n();
  }

  // Step 3: pooled lasso of the stacked surrogates on the stacked designs
  Eigen::MatrixXd Xs(total_rows, c.p());
  Eigen::VectorXd ys(total_rows);
  Eigen::Index row = 0;
  for (int k : studies) {
    const Dataset& d = c.study(k);
    Xs.middleRows(row, d.n()) = d.X;
    ys.segment(row, d.n()) = surrogates[k];
    row += d.n();
  }
  LassoSolverConfig fuse = cfg.lasso_cfg;
  fuse.lambda = lambdas.lambda1;
  const SolveReport fused = solve_lasso_ls(Xs, ys, fuse);
  fit.all_converged = fit.all_converged && fused.converged;
  fit.beta_fused = fused.coef;

  // Step 4: lasso in delta of the target surrogate residual
  const Eigen::VectorXd resp =
      c.target.X * fit.beta_fused.beta - surrogates[0];
  LassoSolverConfig debias = cfg.lasso_cfg;
  debias.lambda = lambdas.lambda2;
  const SolveReport delta = solve_lasso_ls(c.target.X, resp, debias);
  fit.all_converged = fit.all_converged && delta.converged;
  fit.delta_hat = delta.coef;

  fit.beta_hat = CoefVector(fit.beta_fused.beta - fit.delta_hat.beta);
  return fit;
}

TransferFit fit_naive(const StudyCollection& c, const TransferConfig& cfg) {
  return fit_oracle(c, InformativeSet::all(c.num_sources()), cfg);
}

}  // namespace tlqr
