#include "tlqr/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tlqr/errors.hpp"

namespace tlqr {

double kernel_G(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  const double u2 = u * u;
  return ((-315.0 / 64.0 * u2 + 735.0 / 64.0) * u2 - 525.0 / 64.0) * u2 +
         105.0 / 64.0;
}

KernelSpec default_kernel() { return {kernel_G, 1.0}; }

double bandwidth(const BandwidthRule& rule, int s, Eigen::Index n) {
  if (rule.kind == BandwidthRule::Kind::Fixed) {
    if (!(rule.fixed_value > 0.0))
      throw InvalidArgument("fixed bandwidth must be > 0");
    return rule.fixed_value;
  }
  if (s < 1) throw InvalidArgument("plug-in sparsity must be >= 1");
  const double sd = static_cast<double>(s);
  if (rule.kind == BandwidthRule::Kind::OracleStep) {
    if (n < 2) throw InvalidSize("bandwidth needs n >= 2");
    const double nd = static_cast<double>(n);
    const double ln = std::log(nd);
    return std::sqrt(sd * ln / nd) + std::pow(sd, 1.5) * ln / (10.0 * nd);
  }
  // DetectionSplit: n is the full target size; the rule works on halves.
  if (n < 4) throw InvalidSize("detection-split bandwidth needs n >= 4");
  const double nd = static_cast<double>(n);
  const double half = nd / 2.0;
  const double ln = std::log(half);
  return std::sqrt(sd * ln / half) + std::pow(sd, 1.5) * ln / (5.0 * nd);
}

int plug_in_sparsity(const BandwidthRule& rule, const CoefVector& pilot) {
  if (rule.sparsity_override) return std::max(1, *rule.sparsity_override);
  return std::max(1, static_cast<int>(pilot.sparsity));
}

DensityEstimate estimate_density_at_zero(const Dataset& d,
                                         const CoefVector& beta_hat, double h,
                                         const KernelSpec& kernel, int scale) {
  if (!(h > 0.0)) throw InvalidArgument("bandwidth must be > 0");
  if (scale != 1 && scale != 2)
    throw InvalidArgument("scale must be 1 or 2");
  if (d.p() != beta_hat.beta.size())
    throw DimensionMismatch("density: coefficient length differs from p");

  const Eigen::VectorXd resid = d.y - d.X * beta_hat.beta;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < resid.size(); ++i)
    sum += kernel.evaluate(resid[i] / h);

  // N = scale * n: a half sample with scale = 2 stands in for the full
  // sample it was split from, so the prefactor scale/(N h) reduces to the
  // plain 1/(n h) normalization on the rows at hand.
  const double full_n = static_cast<double>(scale) * static_cast<double>(d.n());
  DensityEstimate est;
  est.f0 = static_cast<double>(scale) * sum / (full_n * h);
  est.bandwidth = h;
  est.usable = est.f0 >= kDensityFloor;
  return est;
}

Eigen::VectorXd surrogate_responses(const Dataset& d,
                                    const CoefVector& beta_hat,
                                    const DensityEstimate& f0,
                                    QuantileLevel tau) {
  if (!f0.usable)
    throw DegenerateDensity(
        "estimated error density at zero (" + std::to_string(f0.f0) +
        ") is below the usability floor " + std::to_string(kDensityFloor));
  const double t = tau.value();
  const Eigen::VectorXd fitted = d.X * beta_hat.beta;
  Eigen::VectorXd out(d.n());
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const double indicator = (d.y[i] - fitted[i] <= 0.0) ? 1.0 : 0.0;
    out[i] = fitted[i] - (indicator - t) / f0.f0;
  }
  return out;
}

}  // namespace tlqr
