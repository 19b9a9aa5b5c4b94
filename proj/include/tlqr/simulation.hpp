#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

#include "tlqr/rng.hpp"
#include "tlqr/types.hpp"

namespace tlqr {

// Compact description of a study's covariate covariance.
struct CovarianceSpec {
  enum class Kind { Identity, ToeplitzGeometric, ToeplitzBanded };
  Kind kind = Kind::Identity;
  Eigen::Index p = 0;
  double decay = 0.5;  // ToeplitzGeometric: Sigma_ij = decay^|i-j|
  int band_k = 0;      // ToeplitzBanded: 2k-1 off-diagonals of 1/(k+1)

  Eigen::MatrixXd materialize() const;
  double quad_form(const Eigen::VectorXd& v) const;
};

// Sigma_ij = 0.5^|i-j|, shared by every study in the homogeneous design.
CovarianceSpec toeplitz_homogeneous(Eigen::Index p);

// Source-k covariance of the heterogeneous design: symmetric Toeplitz with
// first row (1, 1/(k+1) repeated 2k-1 times, zeros). Requires 2k <= p.
// The target uses the identity by convention.
CovarianceSpec toeplitz_heterogeneous(Eigen::Index p, int k);

// Rows i.i.d. N(0, Sigma) via the Cholesky factor (eigendecomposition
// fallback for semi-definite Sigma) applied to standard normal draws.
Eigen::MatrixXd sample_gaussian_rows(Eigen::Index n, const CovarianceSpec& cov,
                                     rng::Stream& stream);
Eigen::MatrixXd sample_gaussian_rows(Eigen::Index n,
                                     const Eigen::MatrixXd& cov,
                                     rng::Stream& stream);

struct DesignSpec {
  enum class Kind { Homogeneous, Heterogeneous };
  enum class ErrorCase { Normal, Cauchy };

  Kind kind = Kind::Homogeneous;
  Eigen::Index p = 150;
  Eigen::Index n0 = 150;
  Eigen::Index n_k = 150;
  int K = 20;
  int s0 = 20;
  double d = 2.0;
  int num_informative = 20;
  double eta = 20.0;
  ErrorCase error_case = ErrorCase::Normal;
  double tau = 0.8;
  std::uint64_t seed = 0;
};

void validate_design(const DesignSpec& spec);

struct GroundTruth {
  std::vector<CoefVector> beta;        // studies 0..K, target first
  InformativeSet informative;
  std::vector<CovarianceSpec> sigma;   // studies 0..K
};

// Target coefficients: s0 ones then zeros. Each source perturbs the target
// on a random half of the coordinates H_k with i.i.d. Laplace noise whose
// mean absolute deviation is 2d/p for informative sources (expected l1
// distance d) and 140/p otherwise (expected l1 distance 70). The
// informative set is canonically {1..num_informative}.
GroundTruth generate_coefficients(const DesignSpec& spec);

// Noise with P(eps <= 0) = tau exactly: the location is the (1-tau)
// quantile of the zero-centered scaled distribution. Normal errors have
// variance beta'Sigma beta / eta; Cauchy errors use it as the scale.
Eigen::VectorXd sample_errors(Eigen::Index n, DesignSpec::ErrorCase error_case,
                              QuantileLevel tau, const Eigen::VectorXd& beta,
                              const CovarianceSpec& cov, double eta,
                              rng::Stream& stream);

// Full synthetic draw: target + K sources + a held-out target sample of
// size floor(0.2 * n0). Deterministic function of spec.seed.
std::tuple<StudyCollection, GroundTruth, Dataset> generate_collection(
    const DesignSpec& spec);

}  // namespace tlqr
