#pragma once

#include <functional>
#include <optional>

#include "tlqr/types.hpp"

namespace tlqr {

// Compactly supported smoothing kernel: evaluate(u) = 0 for |u| >= 1 and
// the kernel integrates to 1 over [-1, 1].
struct KernelSpec {
  std::function<double(double)> evaluate;
  double support_radius = 1.0;
};

// Sixth-degree polynomial kernel on (-1, 1):
//   -315/64 u^6 + 735/64 u^4 - 525/64 u^2 + 105/64,  zero outside.
// Vanishes together with its derivative at +-1.
double kernel_G(double u);

KernelSpec default_kernel();

// Bandwidth selection rules.
//   OracleStep:      h = sqrt(s log n / n) + s^{3/2} log n / (10 n)
//   DetectionSplit:  evaluated on half samples; the caller passes the FULL
//                    target size n and the rule substitutes n/2:
//                    h = sqrt(s log(n/2) / (n/2)) + s^{3/2} log(n/2) / (5 n)
//   Fixed:           passthrough of a user-chosen h > 0
// The sparsity s is a plug-in: by default the support size of the pilot
// fit (at least 1); synthetic runs may override it with the true value.
struct BandwidthRule {
  enum class Kind { OracleStep, DetectionSplit, Fixed };
  Kind kind = Kind::OracleStep;
  double fixed_value = 0.0;
  std::optional<int> sparsity_override;

  static BandwidthRule oracle_step() { return {}; }
  static BandwidthRule detection_split() {
    return {Kind::DetectionSplit, 0.0, std::nullopt};
  }
  static BandwidthRule fixed(double h) {
    return {Kind::Fixed, h, std::nullopt};
  }
};

double bandwidth(const BandwidthRule& rule, int s, Eigen::Index n);

// Resolves the plug-in sparsity for a study given its pilot fit.
int plug_in_sparsity(const BandwidthRule& rule, const CoefVector& pilot);

// Below this value the estimated density is unusable: dividing by it when
// building surrogate responses would be numerically explosive.
inline constexpr double kDensityFloor = 1e-4;

struct DensityEstimate {
  double f0 = 0.0;
  double bandwidth = 0.0;
  bool usable = false;
};

// Kernel density estimate of the residual density at zero,
//   f0 = scale / (N h) * sum_i G((y_i - x_i'beta) / h),
// where N = scale * n(d). scale = 1 is the whole-sample estimate; scale = 2
// marks the half-sample convention 2/(n h) used on split samples, where the
// half on hand stands in for a full sample of twice its size.
DensityEstimate estimate_density_at_zero(const Dataset& d,
                                         const CoefVector& beta_hat, double h,
                                         const KernelSpec& kernel,
                                         int scale = 1);

// Surrogate responses
//   ytilde_i = x_i'beta - (1/f0) * (1{y_i - x_i'beta <= 0} - tau),
// turning the quantile problem into least squares on ytilde.
Eigen::VectorXd surrogate_responses(const Dataset& d,
                                    const CoefVector& beta_hat,
                                    const DensityEstimate& f0,
                                    QuantileLevel tau);

}  // namespace tlqr
