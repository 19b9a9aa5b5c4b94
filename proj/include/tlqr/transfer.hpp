#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "tlqr/solvers.hpp"
#include "tlqr/surrogate.hpp"
#include "tlqr/types.hpp"

namespace tlqr {

// Hyperparameters for the transfer pipeline. Unset lambdas resolve
// automatically: lambda0 by cross-validation on the target, lambda1 and
// lambda2 from the sample-size formulas (see resolve_lambdas).
struct TransferConfig {
  std::optional<double> lambda0;
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  BandwidthRule bandwidth_rule;
  QrSolverConfig qr_cfg;
  LassoSolverConfig lasso_cfg;
  KernelSpec kernel = default_kernel();
  int cv_folds = 5;
  std::vector<double> cv_grid;  // empty = default_lambda0_grid
  std::uint64_t cv_seed = 0;
};

struct ResolvedLambdas {
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

struct TransferFit {
  CoefVector beta_hat;    // final estimate = beta_fused - delta_hat
  CoefVector beta_fused;  // pooled fit over the used set
  CoefVector delta_hat;   // target-only debiasing correction
  std::map<int, CoefVector> initial_fits;      // study index -> pilot fit
  std::map<int, DensityEstimate> densities;    // study index -> f_hat(0)
  InformativeSet set_used;
  ResolvedLambdas lambdas;
  bool all_converged = true;
};

// Auto lambda1 = sqrt(2 log(p v nbar_A) / (n_A + n0)) with
// nbar_A = max_{k in A u {0}} n_k and n_A = sum of source sizes in A;
// Auto lambda2 = sqrt(2 log(p v n0) / n0); Auto lambda0 comes from
// cross-validation on the target. Explicit values pass through unchanged.
ResolvedLambdas resolve_lambdas(const StudyCollection& c,
                                const InformativeSet& A,
                                const TransferConfig& cfg);

// Penalized quantile regression on the target alone.
TransferFit fit_target_only(const StudyCollection& c,
                            const TransferConfig& cfg);

// Four-step pipeline with a known informative set: per-study penalized
// quantile regression pilots, kernel-smoothed surrogate responses, a pooled
// lasso over the target plus the sources in A (target block first, then
// sources by ascending index), and a target-only lasso debiasing step.
TransferFit fit_oracle(const StudyCollection& c, const InformativeSet& A,
                       const TransferConfig& cfg);

// fit_oracle with every source treated as informative.
TransferFit fit_naive(const StudyCollection& c, const TransferConfig& cfg);

}  // namespace tlqr
