#include "tlqr/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tlqr/errors.hpp"

namespace tlqr {

Eigen::MatrixXd CovarianceSpec::materialize() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(p, p);
  switch (kind) {
    case Kind::Identity:
      break;
    case Kind::ToeplitzGeometric:
      for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
          out(i, j) = std::pow(decay, static_cast<double>(std::abs(i - j)));
      break;
    case Kind::ToeplitzBanded: {
      const double v = 1.0 / (band_k + 1.0);
      for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) {
          const Eigen::Index lag = std::abs(i - j);
          if (lag == 0)
            out(i, j) = 1.0;
          else if (lag <= 2 * band_k - 1)
            out(i, j) = v;
          else
            out(i, j) = 0.0;
        }
      break;
    }
  }
  return out;
}

double CovarianceSpec::quad_form(const Eigen::VectorXd& v) const {
  if (v.size() != p)
    throw DimensionMismatch("quad_form: vector length differs from p");
  if (kind == Kind::Identity) return v.squaredNorm();
  const Eigen::MatrixXd sigma = materialize();
  return v.dot(sigma * v);
}

CovarianceSpec toeplitz_homogeneous(Eigen::Index p) {
  if (p < 1) throw InvalidArgument("p must be >= 1");
  return {CovarianceSpec::Kind::ToeplitzGeometric, p, 0.5, 0};
}

CovarianceSpec toeplitz_heterogeneous(Eigen::Index p, int k) {
  if (p < 1) throw InvalidArgument("p must be >= 1");
  if (k < 1) throw InvalidArgument("source index k must be >= 1");
  if (2 * static_cast<Eigen::Index>(k) > p)
    throw BandTooWide("band 2k=" + std::to_string(2 * k) + " exceeds p=" +
                      std::to_string(p));
  return {CovarianceSpec::Kind::ToeplitzBanded, p, 0.0, k};
}

Eigen::MatrixXd sample_gaussian_rows(Eigen::Index n,
                                     const Eigen::MatrixXd& cov,
                                     rng::Stream& stream) {
  if (cov.rows() != cov.cols())
    throw DimensionMismatch("covariance must be square");
  const Eigen::Index p = cov.rows();

  Eigen::MatrixXd factor;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) {
    factor = llt.matrixL();
  } else {
    // semi-definite fallback: clamp tiny negative eigenvalues to zero
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const double max_ev = eig.eigenvalues().maxCoeff();
    const double floor = -1e-10 * std::max(1.0, max_ev);
    Eigen::VectorXd ev = eig.eigenvalues();
    for (Eigen::Index i = 0; i < p; ++i) {
      if (ev[i] < floor)
        throw NotPSD("covariance has negative eigenvalue " +
                     std::to_string(ev[i]));
      ev[i] = std::max(ev[i], 0.0);
    }
    factor = eig.eigenvectors() * ev.cwiseSqrt().asDiagonal();
  }

  Eigen::MatrixXd out(n, p);
  Eigen::VectorXd z(p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) z[j] = stream.normal();
    out.row(i) = (factor * z).transpose();
  }
  return out;
}

Eigen::MatrixXd sample_gaussian_rows(Eigen::Index n, const CovarianceSpec& cov,
                                     rng::Stream& stream) {
  if (cov.kind == CovarianceSpec::Kind::Identity) {
    Eigen::MatrixXd out(n, cov.p);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < cov.p; ++j) out(i, j) = stream.normal();
    return out;
  }
  return sample_gaussian_rows(n, cov.materialize(), stream);
}

void validate_design(const DesignSpec& spec) {
  if (spec.p < 1 || spec.n0 < 1) throw InvalidArgument("need p >= 1, n0 >= 1");
  if (spec.K < 0) throw InvalidArgument("K must be >= 0");
  if (spec.K > 0 && spec.n_k < 1)
    throw InvalidArgument("n_k must be >= 1 when sources exist");
  if (spec.s0 < 0 || spec.s0 > spec.p)
    throw InvalidArgument("need 0 <= s0 <= p");
  if (spec.num_informative < 0 || spec.num_informative > spec.K)
    throw InvalidArgument("need 0 <= num_informative <= K");
  if (!(spec.d >= 0.0)) throw InvalidArgument("d must be >= 0");
  if (!(spec.eta > 0.0)) throw InvalidArgument("eta must be > 0");
  if (!(spec.tau > 0.0 && spec.tau < 1.0))
    throw InvalidArgument("tau must lie in (0, 1)");
  if (spec.K > 0 && spec.p % 2 != 0)
    throw InvalidArgument(
        "p must be even so source perturbations cover half the coordinates");
  if (spec.kind == DesignSpec::Kind::Heterogeneous &&
      2 * static_cast<Eigen::Index>(spec.K) > spec.p)
    throw BandTooWide("heterogeneous design needs 2K <= p");
}

GroundTruth generate_coefficients(const DesignSpec& spec) {
  validate_design(spec);
  GroundTruth truth;

  Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(spec.p);
  beta0.head(spec.s0).setOnes();
  truth.beta.emplace_back(beta0);

  std::vector<int> informative(static_cast<std::size_t>(spec.num_informative));
  std::iota(informative.begin(), informative.end(), 1);
  truth.informative = InformativeSet(std::move(informative));

  truth.sigma.resize(static_cast<std::size_t>(spec.K) + 1);
  for (int k = 0; k <= spec.K; ++k) {
    if (spec.kind == DesignSpec::Kind::Homogeneous)
      truth.sigma[static_cast<std::size_t>(k)] = toeplitz_homogeneous(spec.p);
    else
      truth.sigma[static_cast<std::size_t>(k)] =
          k == 0 ? CovarianceSpec{CovarianceSpec::Kind::Identity, spec.p, 0, 0}
                 : toeplitz_heterogeneous(spec.p, k);
  }

  for (int k = 1; k <= spec.K; ++k) {
    // random coordinate subset H_k of size p/2, then Laplace perturbations
    // on it in ascending coordinate order
    std::vector<Eigen::Index> coords(static_cast<std::size_t>(spec.p));
    std::iota(coords.begin(), coords.end(), 0);
    rng::Stream subset = rng::substream(spec.seed, static_cast<std::uint64_t>(k),
                                        rng::Purpose::kSubsetDraw);
    subset.shuffle(coords);
    coords.resize(static_cast<std::size_t>(spec.p / 2));
    std::sort(coords.begin(), coords.end());

    const double b = truth.informative.contains(k)
                         ? 2.0 * spec.d / static_cast<double>(spec.p)
                         : 140.0 / static_cast<double>(spec.p);
    rng::Stream noise = rng::substream(spec.seed, static_cast<std::uint64_t>(k),
                                       rng::Purpose::kCoefNoise);
    Eigen::VectorXd beta_k = beta0;
    for (Eigen::Index j : coords) beta_k[j] += noise.laplace(b);
    truth.beta.emplace_back(std::move(beta_k));
  }
  return truth;
}

Eigen::VectorXd sample_errors(Eigen::Index n, DesignSpec::ErrorCase error_case,
                              QuantileLevel tau, const Eigen::VectorXd& beta,
                              const CovarianceSpec& cov, double eta,
                              rng::Stream& stream) {
  if (!(eta > 0.0)) throw InvalidArgument("eta must be > 0");
  const double scale_param = cov.quad_form(beta) / eta;
  const double q = 1.0 - tau.value();

  Eigen::VectorXd out(n);
  if (error_case == DesignSpec::ErrorCase::Normal) {
    const double sd = std::sqrt(scale_param);
    const double loc = sd == 0.0 ? 0.0 : sd * rng::normal_quantile(q);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = loc + sd * stream.normal();
  } else {
    const double gamma = scale_param;
    const double loc = gamma == 0.0 ? 0.0 : gamma * rng::cauchy_quantile(q);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = stream.cauchy(loc, gamma);
  }
  return out;
}

std::tuple<StudyCollection, GroundTruth, Dataset> generate_collection(
    const DesignSpec& spec) {
  validate_design(spec);
  GroundTruth truth = generate_coefficients(spec);
  const QuantileLevel tau(spec.tau);

  auto draw_study = [&](int k, Eigen::Index n) {
    rng::Stream design = rng::substream(
        spec.seed, static_cast<std::uint64_t>(k), rng::Purpose::kDesign);
    rng::Stream errors = rng::substream(
        spec.seed, static_cast<std::uint64_t>(k), rng::Purpose::kErrors);
    const CovarianceSpec& cov = truth.sigma[static_cast<std::size_t>(k)];
    const Eigen::VectorXd& beta = truth.beta[static_cast<std::size_t>(k)].beta;
    Dataset d;
    d.X = sample_gaussian_rows(n, cov, design);
    d.y = d.X * beta +
          sample_errors(n, spec.error_case, tau, beta, cov, spec.eta, errors);
    return d;
  };

  StudyCollection c{draw_study(0, spec.n0), {}, tau};
  c.sources.reserve(static_cast<std::size_t>(spec.K));
  for (int k = 1; k <= spec.K; ++k) c.sources.push_back(draw_study(k, spec.n_k));

  // held-out rows follow the target model; design and noise come from one
  // dedicated stream, drawn design-first
  const Eigen::Index n_t = spec.n0 / 5;
  rng::Stream holdout_stream =
      rng::substream(spec.seed, 0, rng::Purpose::kHoldout);
  Dataset holdout;
  holdout.X = sample_gaussian_rows(n_t, truth.sigma[0], holdout_stream);
  holdout.y = holdout.X * truth.beta[0].beta +
              sample_errors(n_t, spec.error_case, tau, truth.beta[0].beta,
                            truth.sigma[0], spec.eta, holdout_stream);

  return {std::move(c), std::move(truth), std::move(holdout)};
}

}  // namespace tlqr
