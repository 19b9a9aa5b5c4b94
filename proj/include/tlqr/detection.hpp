#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "tlqr/transfer.hpp"
#include "tlqr/types.hpp"

namespace tlqr {

// Selection-strictness rule for the detection threshold.
//   Fixed:    use `value` as given
//   Auto:     0.01
//   AutoCeps: min(0.01, c_eps_hat), where c_eps_hat is estimated from
//             full-data pilot fits (costs K+1 extra solves)
struct EpsilonRule {
  enum class Mode { Fixed, Auto, AutoCeps };
  Mode mode = Mode::Auto;
  double value = 0.01;

  static EpsilonRule fixed(double v) { return {Mode::Fixed, v}; }
  static EpsilonRule automatic() { return {}; }
  static EpsilonRule auto_ceps() { return {Mode::AutoCeps, 0.01}; }
};

struct DetectionConfig {
  EpsilonRule epsilon0;
  std::uint64_t split_seed = 0;
  TransferConfig transfer_cfg;
};

struct DetectionReport {
  InformativeSet detected;
  double loss_baseline = 0.0;            // held-out loss of the train-half fit
  std::vector<double> loss_per_source;   // length K; +inf for excluded sources
  double epsilon_used = 0.0;
  std::vector<Eigen::Index> split_train;  // I
  std::vector<Eigen::Index> split_test;   // I^c
  std::vector<int> excluded_sources;      // density failures, kept out with a warning
  std::optional<double> c_eps;            // recorded when estimated
};

// Uniformly random subset I of size floor(n0/2) and its complement, both
// sorted ascending. Identical seeds give identical splits.
std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_target(
    Eigen::Index n0, std::uint64_t seed);

// Squared-error loss of beta against the surrogate responses built on the
// testing half: a pilot quantile regression is fit on the same test rows,
// the error density at zero is estimated under the half-sample convention,
// and the loss is the mean of (ytilde_i - x_i'beta)^2 over the test rows.
double empirical_target_loss(const Dataset& test, const CoefVector& beta,
                             QuantileLevel tau, const TransferConfig& cfg);

// Intermediate output of detection steps 1-2: the single-source pooled
// fits scored on the testing half. detect() and pseudo_detect() both
// threshold these scores, so callers wanting several variants can compute
// them once.
struct DetectionScores {
  double baseline = 0.0;
  std::vector<double> losses;             // per source; +inf for excluded
  std::vector<Eigen::Index> split_train;
  std::vector<Eigen::Index> split_test;
  std::vector<int> excluded_sources;
  std::vector<CoefVector> source_fits;    // full-data pilots, index k-1
  double lambda0 = 0.0;                   // resolved value used throughout
  // held-out loss oracle (test design and its surrogate responses)
  Eigen::MatrixXd test_X;
  Eigen::VectorXd test_surrogate;
};

DetectionScores detection_scores(const StudyCollection& c,
                                 const DetectionConfig& dcfg);

DetectionReport detect_from_scores(const StudyCollection& c,
                                   const DetectionScores& scores,
                                   const DetectionConfig& dcfg);

DetectionReport pseudo_from_scores(const DetectionScores& scores, int m,
                                   int num_sources);

// Sample-splitting detection of the informative set: sources whose pooled
// single-source fit scores within (1 + epsilon0) of the target-only
// baseline on the testing half are kept.
DetectionReport detect(const StudyCollection& c, const DetectionConfig& dcfg);

// Known-size variant: keeps the m sources with the smallest held-out
// losses (ties broken toward the smaller source index).
DetectionReport pseudo_detect(const StudyCollection& c, int m,
                              const DetectionConfig& dcfg);

// c_eps estimate: min over sources of the covariance-weighted squared
// distance between full-data pilot fits, relative to the baseline loss.
// initial_fits holds studies 0..K (target first).
double estimate_c_eps(const StudyCollection& c,
                      const std::vector<CoefVector>& initial_fits,
                      double q0_hat);

// Detection followed by the transfer pipeline on the full target data with
// the detected set.
std::pair<TransferFit, DetectionReport> fit_translasso(
    const StudyCollection& c, const DetectionConfig& dcfg);

}  // namespace tlqr
