#include "tlqr/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "tlqr/errors.hpp"
#include "tlqr/solvers.hpp"

namespace tlqr {

std::string method_name(Method m) {
  switch (m) {
    case Method::TargetOnly: return "target_only";
    case Method::Oracle: return "oracle";
    case Method::Naive: return "naive";
    case Method::Pseudo: return "pseudo";
    case Method::TransLasso: return "translasso";
  }
  throw InvalidArgument("unknown method");
}

Method method_from_name(const std::string& name) {
  if (name == "target_only" || name == "target-only") return Method::TargetOnly;
  if (name == "oracle") return Method::Oracle;
  if (name == "naive") return Method::Naive;
  if (name == "pseudo") return Method::Pseudo;
  if (name == "translasso") return Method::TransLasso;
  throw InvalidArgument("unknown method name: " + name);
}

double mse_beta(const CoefVector& est, const CoefVector& truth) {
  if (est.beta.size() != truth.beta.size())
    throw DimensionMismatch("mse_beta: coefficient lengths differ");
  return (est.beta - truth.beta).squaredNorm();
}

double oos_quantile_loss(const Dataset& holdout, const CoefVector& est,
                         QuantileLevel tau) {
  if (holdout.n() == 0) throw EmptyDataset("holdout is empty");
  if (holdout.p() != est.beta.size())
    throw DimensionMismatch("holdout p differs from coefficient length");
  return mean_pinball_loss(holdout, est.beta, tau);
}

void GroupMap::validate(Eigen::Index p) const {
  for (Eigen::Index j = 1; j <= p; ++j)
    if (!assignment.count(static_cast<int>(j)))
      throw MissingCategory("feature index " + std::to_string(j) +
                            " has no category");
}

GroupContributions group_contributions(const CoefVector& est,
                                       const GroupMap& groups) {
  groups.validate(est.beta.size());
  GroupContributions out;
  double total = 0.0;
  for (Eigen::Index j = 0; j < est.beta.size(); ++j) {
    const std::string& cat = groups.assignment.at(static_cast<int>(j) + 1);
    out.share[cat] += std::abs(est.beta[j]);
    total += std::abs(est.beta[j]);
  }
  if (total == 0.0) {
    out.zero_coefficient = true;
    return out;  // all categories stay at zero
  }
  for (auto& [cat, v] : out.share) v /= total;
  return out;
}

std::pair<bool, double> detection_accuracy(const InformativeSet& detected,
                                           const InformativeSet& truth) {
  const auto& a = detected.members();
  const auto& b = truth.members();
  std::vector<int> inter, uni;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(inter));
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(uni));
  const bool exact = a == b;
  const double jaccard =
      uni.empty() ? 1.0
                  : static_cast<double>(inter.size()) /
                        static_cast<double>(uni.size());
  return {exact, jaccard};
}

}  // namespace tlqr
