#include "tlqr/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tlqr/errors.hpp"

namespace tlqr {

QuantileLevel::QuantileLevel(double tau) : tau_(tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw InvalidArgument("quantile level must lie strictly in (0, 1), got " +
                          std::to_string(tau));
}

CoefVector::CoefVector(Eigen::VectorXd b) : beta(std::move(b)) {
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) support.push_back(j);
  }
  sparsity = static_cast<Eigen::Index>(support.size());
}

CoefVector CoefVector::zeros(Eigen::Index p) {
  return CoefVector(Eigen::VectorXd::Zero(p));
}

InformativeSet::InformativeSet(std::vector<int> members)
    : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  auto dup = std::adjacent_find(members_.begin(), members_.end());
  if (dup != members_.end())
    throw InvalidArgument("informative set contains duplicate index " +
                          std::to_string(*dup));
  if (!members_.empty() && members_.front() < 1)
    throw InvalidArgument("source indices start at 1");
}

InformativeSet InformativeSet::all(int K) {
  std::vector<int> m(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) m[static_cast<std::size_t>(k - 1)] = k;
  return InformativeSet(std::move(m));
}

bool InformativeSet::contains(int k) const {
  return std::binary_search(members_.begin(), members_.end(), k);
}

void validate_dataset(const Dataset& d) {
  if (d.X.rows() == 0 || d.X.cols() == 0 || d.y.size() == 0)
    throw EmptyDataset("dataset has zero rows or columns");
  if (d.X.rows() != d.y.size())
    throw DimensionMismatch("X has " + std::to_string(d.X.rows()) +
                            " rows but y has length " +
                            std::to_string(d.y.size()));
  if (!d.X.allFinite() || !d.y.allFinite())
    throw NonFinite("dataset contains NaN or infinite entries");
}

void validate_collection(const StudyCollection& c) {
  validate_dataset(c.target);
  const Eigen::Index p = c.target.p();
  for (std::size_t k = 0; k < c.sources.size(); ++k) {
    validate_dataset(c.sources[k]);
    if (c.sources[k].p() != p)
      throw DimensionMismatch("source " + std::to_string(k + 1) + " has p=" +
                              std::to_string(c.sources[k].p()) +
                              " but target has p=" + std::to_string(p));
  }
}

double l1_distance(const CoefVector& a, const CoefVector& b) {
  if (a.beta.size() != b.beta.size())
    throw DimensionMismatch("coefficient vectors differ in length");
  return (a.beta - b.beta).lpNorm<1>();
}

}  // namespace tlqr
