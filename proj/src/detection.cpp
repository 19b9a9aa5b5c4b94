#include "tlqr/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tlqr/errors.hpp"
#include "tlqr/rng.hpp"

namespace tlqr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Pilot fit, density and surrogate responses for one half of the target.
struct HalfTargetSurrogate {
  CoefVector pilot;
  DensityEstimate density;
  Eigen::VectorXd y_tilde;
};

HalfTargetSurrogate build_half_surrogate(const Dataset& half,
                                         QuantileLevel tau,
                                         const TransferConfig& cfg,
                                         double lambda0,
                                         Eigen::Index full_n0) {
  QrSolverConfig qr = cfg.qr_cfg;
  qr.lambda = lambda0;
  HalfTargetSurrogate out;
  out.pilot = solve_qr_lasso(half, tau, qr).coef;

  BandwidthRule rule = BandwidthRule::detection_split();
  rule.sparsity_override = cfg.bandwidth_rule.sparsity_override;
  const int s = plug_in_sparsity(rule, out.pilot);
  const double h = bandwidth(rule, s, full_n0);
  out.density =
      estimate_density_at_zero(half, out.pilot, h, cfg.kernel, /*scale=*/2);
  if (!out.density.usable)
    throw DegenerateDensity(
        "target half-sample: error density at zero is degenerate (" +
            std::to_string(out.density.f0) + ")",
        0);
  out.y_tilde = surrogate_responses(half, out.pilot, out.density, tau);
  return out;
}

double resolve_lambda0(const StudyCollection& c, const TransferConfig& cfg) {
  if (cfg.lambda0) return *cfg.lambda0;
  const std::vector<double> grid =
      cfg.cv_grid.empty() ? default_lambda0_grid(c.target.n(), c.p())
                          : cfg.cv_grid;
  return cross_validate_lambda0(c.target, c.tau, grid, cfg.cv_folds,
                                cfg.cv_seed, cfg.qr_cfg);
}

double held_out_loss(const Eigen::MatrixXd& test_X,
                     const Eigen::VectorXd& y_tilde,
                     const Eigen::VectorXd& beta) {
  return (y_tilde - test_X * beta).squaredNorm() /
         static_cast<double>(test_X.rows());
}

}  // namespace

std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_target(
    Eigen::Index n0, std::uint64_t seed) {
  if (n0 < 4)
    throw TooFewSamples("sample splitting needs n0 >= 4, got " +
                        std::to_string(n0));
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n0));
  std::iota(idx.begin(), idx.end(), 0);
  rng::Stream stream(seed);
  stream.shuffle(idx);
  const auto half = static_cast<std::ptrdiff_t>(n0 / 2);
  std::vector<Eigen::Index> train(idx.begin(), idx.begin() + half);
  std::vector<Eigen::Index> test(idx.begin() + half, idx.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

double empirical_target_loss(const Dataset& test, const CoefVector& beta,
                             QuantileLevel tau, const TransferConfig& cfg) {
  validate_dataset(test);
  if (beta.beta.size() != test.p())
    throw DimensionMismatch("loss: coefficient length differs from p");
  double lambda0;
  if (cfg.lambda0) {
    lambda0 = *cfg.lambda0;
  } else {
    const std::vector<double> grid =
        cfg.cv_grid.empty() ? default_lambda0_grid(test.n(), test.p())
                            : cfg.cv_grid;
    lambda0 = cross_validate_lambda0(test, tau, grid, cfg.cv_folds,
                                     cfg.cv_seed, cfg.qr_cfg);
  }
  // the testing half stands in for a full sample of twice its size
  const HalfTargetSurrogate sur =
      build_half_surrogate(test, tau, cfg, lambda0, 2 * test.n());
  return held_out_loss(test.X, sur.y_tilde, beta.beta);
}

DetectionScores detection_scores(const StudyCollection& c,
                                 const DetectionConfig& dcfg) {
  validate_collection(c);
  const int K = c.num_sources();
  if (K < 1) throw InvalidArgument("detection needs at least one source");

  const TransferConfig& cfg = dcfg.transfer_cfg;
  DetectionScores scores;
  scores.lambda0 = resolve_lambda0(c, cfg);

  auto [train_idx, test_idx] = split_target(c.target.n(), dcfg.split_seed);
  Dataset train{c.target.X(train_idx, Eigen::all), c.target.y(train_idx)};
  Dataset test{c.target.X(test_idx, Eigen::all), c.target.y(test_idx)};
  scores.split_train = std::move(train_idx);
  scores.split_test = std::move(test_idx);

  // train-half pilot and its surrogate responses feed the pooled fits
  const HalfTargetSurrogate train_sur =
      build_half_surrogate(train, c.tau, cfg, scores.lambda0, c.target.n());
  // test-half surrogate defines the held-out loss
  const HalfTargetSurrogate test_sur =
      build_half_surrogate(test, c.tau, cfg, scores.lambda0, c.target.n());
  scores.test_X = test.X;
  scores.test_surrogate = test_sur.y_tilde;

  scores.baseline =
      held_out_loss(scores.test_X, scores.test_surrogate, train_sur.pilot.beta);

  const double p = static_cast<double>(c.p());
  const double n_train = static_cast<double>(train.n());

  scores.losses.assign(static_cast<std::size_t>(K), kInf);
  scores.source_fits.resize(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) {
    const Dataset& src = c.study(k);
    QrSolverConfig qr = cfg.qr_cfg;
    qr.lambda = scores.lambda0;
    const CoefVector fit = solve_qr_lasso(src, c.tau, qr).coef;
    scores.source_fits[static_cast<std::size_t>(k - 1)] = fit;

    BandwidthRule rule = cfg.bandwidth_rule;
    if (rule.kind != BandwidthRule::Kind::Fixed)
      rule.kind = BandwidthRule::Kind::OracleStep;
    const double h = bandwidth(rule, plug_in_sparsity(rule, fit), src.n());
    const DensityEstimate dens =
        estimate_density_at_zero(src, fit, h, cfg.kernel);
    if (!dens.usable) {
      scores.excluded_sources.push_back(k);
      continue;  // screened out with a warning, not a hard failure
    }
    const Eigen::VectorXd src_tilde =
        surrogate_responses(src, fit, dens, c.tau);

    // pooled regression of the two surrogate blocks, target half first
    Eigen::MatrixXd Xs(train.n() + src.n(), c.p());
    Eigen::VectorXd ys(train.n() + src.n());
    Xs.topRows(train.n()) = train.X;
    Xs.bottomRows(src.n()) = src.X;
    ys.head(train.n()) = train_sur.y_tilde;
    ys.tail(src.n()) = src_tilde;

    double lambda1;
    if (cfg.lambda1) {
      lambda1 = *cfg.lambda1;
    } else {
      const double nk = static_cast<double>(src.n());
      lambda1 = std::sqrt(2.0 * std::log(std::max(p, std::max(nk, n_train))) /
                          (nk + n_train));
    }
    LassoSolverConfig fuse = cfg.lasso_cfg;
    fuse.lambda = lambda1;
    const CoefVector pooled = solve_lasso_ls(Xs, ys, fuse).coef;

    scores.losses[static_cast<std::size_t>(k - 1)] =
        held_out_loss(scores.test_X, scores.test_surrogate, pooled.beta);
  }
  return scores;
}

DetectionReport detect_from_scores(const StudyCollection& c,
                                   const DetectionScores& scores,
                                   const DetectionConfig& dcfg) {
  DetectionReport rep;
  rep.loss_baseline = scores.baseline;
  rep.loss_per_source = scores.losses;
  rep.split_train = scores.split_train;
  rep.split_test = scores.split_test;
  rep.excluded_sources = scores.excluded_sources;

  switch (dcfg.epsilon0.mode) {
    case EpsilonRule::Mode::Fixed:
      if (!(dcfg.epsilon0.value > 0.0))
        throw InvalidArgument("epsilon0 must be > 0");
      rep.epsilon_used = dcfg.epsilon0.value;
      break;
    case EpsilonRule::Mode::Auto:
      rep.epsilon_used = 0.01;
      break;
    case EpsilonRule::Mode::AutoCeps: {
      QrSolverConfig qr = dcfg.transfer_cfg.qr_cfg;
      qr.lambda = scores.lambda0;
      std::vector<CoefVector> fits;
      fits.reserve(scores.source_fits.size() + 1);
      fits.push_back(solve_qr_lasso(c.target, c.tau, qr).coef);
      fits.insert(fits.end(), scores.source_fits.begin(),
                  scores.source_fits.end());
      const double q0 = held_out_loss(scores.test_X, scores.test_surrogate,
                                      fits.front().beta);
      const double ceps = estimate_c_eps(c, fits, q0);
      rep.c_eps = ceps;
      rep.epsilon_used = std::min(0.01, ceps);
      break;
    }
  }

  std::vector<int> members;
  const double threshold = (1.0 + rep.epsilon_used) * rep.loss_baseline;
  for (std::size_t k = 0; k < scores.losses.size(); ++k)
    if (scores.losses[k] <= threshold)
      members.push_back(static_cast<int>(k + 1));
  rep.detected = InformativeSet(std::move(members));
  return rep;
}

DetectionReport pseudo_from_scores(const DetectionScores& scores, int m,
                                   int num_sources) {
  if (m < 1 || m > num_sources)
    throw InvalidM("m must lie in [1, K], got m=" + std::to_string(m) +
                   ", K=" + std::to_string(num_sources));
  DetectionReport rep;
  rep.loss_baseline = scores.baseline;
  rep.loss_per_source = scores.losses;
  rep.split_train = scores.split_train;
  rep.split_test = scores.split_test;
  rep.excluded_sources = scores.excluded_sources;
  rep.epsilon_used = std::numeric_limits<double>::quiet_NaN();

  std::vector<int> order(scores.losses.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores.losses[static_cast<std::size_t>(a)] <
           scores.losses[static_cast<std::size_t>(b)];
  });
  std::vector<int> members;
  members.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) members.push_back(order[static_cast<std::size_t>(i)] + 1);
  rep.detected = InformativeSet(std::move(members));
  return rep;
}

DetectionReport detect(const StudyCollection& c, const DetectionConfig& dcfg) {
  return detect_from_scores(c, detection_scores(c, dcfg), dcfg);
}

DetectionReport pseudo_detect(const StudyCollection& c, int m,
                              const DetectionConfig& dcfg) {
  if (m < 1 || m > c.num_sources())
    throw InvalidM("m must lie in [1, K], got m=" + std::to_string(m) +
                   ", K=" + std::to_string(c.num_sources()));
  return pseudo_from_scores(detection_scores(c, dcfg), m, c.num_sources());
}

double estimate_c_eps(const StudyCollection& c,
                      const std::vector<CoefVector>& initial_fits,
                      double q0_hat) {
  const int K = c.num_sources();
  if (static_cast<int>(initial_fits.size()) != K + 1)
    throw DimensionMismatch("need K+1 pilot fits (target first)");
  if (K < 1) throw InvalidArgument("c_eps needs at least one source");
  if (!(q0_hat > 0.0))
    throw ZeroBaselineLoss("baseline loss must be > 0 to estimate c_eps");

  // uncentered second-moment matrix of the target design
  const Eigen::MatrixXd sigma = c.target.X.transpose() * c.target.X /
                                static_cast<double>(c.target.n());
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= K; ++k) {
    const Eigen::VectorXd diff =
        initial_fits[static_cast<std::size_t>(k)].beta - initial_fits[0].beta;
    best = std::min(best, diff.dot(sigma * diff));
  }
  return best / q0_hat;
}

std::pair<TransferFit, DetectionReport> fit_translasso(
    const StudyCollection& c, const DetectionConfig& dcfg) {
  DetectionConfig resolved = dcfg;
  resolved.transfer_cfg.lambda0 = resolve_lambda0(c, dcfg.transfer_cfg);
  DetectionReport report = detect(c, resolved);
  TransferFit fit = fit_oracle(c, report.detected, resolved.transfer_cfg);
  return {std::move(fit), std::move(report)};
}

}  // namespace tlqr
