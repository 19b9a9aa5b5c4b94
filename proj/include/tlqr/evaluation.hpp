#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>

#include "tlqr/types.hpp"

namespace tlqr {

enum class Method { TargetOnly, Oracle, Naive, Pseudo, TransLasso };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct MetricRow {
  Method method = Method::TargetOnly;
  double mse_beta = 0.0;
  double quantile_loss = 0.0;
  std::optional<InformativeSet> detected_set;
  std::optional<bool> detection_exact;
  std::optional<double> jaccard;
};

// Squared l2 error ||est - truth||^2 (not divided by p).
double mse_beta(const CoefVector& est, const CoefVector& truth);

// Mean check loss of predictions on held-out rows.
double oos_quantile_loss(const Dataset& holdout, const CoefVector& est,
                         QuantileLevel tau);

// Feature index (1-based) -> category label, total over 1..p.
struct GroupMap {
  std::map<int, std::string> assignment;

  // Throws MissingCategory when some index in 1..p is uncovered.
  void validate(Eigen::Index p) const;
};

struct GroupContributions {
  std::map<std::string, double> share;  // sums to 1 unless all-zero
  bool zero_coefficient = false;
};

// Per-category share of total |beta|: c(g) = sum_{j in g} |beta_j| / sum_j
// |beta_j|. An all-zero estimate yields all-zero shares with a warning
// flag instead of an error.
GroupContributions group_contributions(const CoefVector& est,
                                       const GroupMap& groups);

// (exact match, Jaccard index); two empty sets count as a perfect match.
std::pair<bool, double> detection_accuracy(const InformativeSet& detected,
                                           const InformativeSet& truth);

}  // namespace tlqr
