#pragma once

#include <Eigen/Dense>
#include <vector>

namespace tlqr {

// One study's design matrix (n x p) and response vector (length n).
// Models carry no intercept; callers wanting one add a constant column.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
};

// Quantile level tau, constrained to the open interval (0, 1).
class QuantileLevel {
 public:
  explicit QuantileLevel(double tau);
  double value() const { return tau_; }

 private:
  double tau_;
};

// Target study (index 0) plus K source studies, all sharing p.
struct StudyCollection {
  Dataset target;
  std::vector<Dataset> sources;
  QuantileLevel tau;

  int num_sources() const { return static_cast<int>(sources.size()); }
  Eigen::Index p() const { return target.p(); }

  // Study k: 0 is the target, 1..K are the sources.
  const Dataset& study(int k) const {
    return k == 0 ? target : sources[static_cast<std::size_t>(k - 1)];
  }
};

// Coefficient estimate with its support. The support is the set of exactly
// nonzero entries; solvers hard-zero coefficients below their threshold
// before constructing one of these so sparsity is well defined.
struct CoefVector {
  Eigen::VectorXd beta;
  std::vector<Eigen::Index> support;
  Eigen::Index sparsity = 0;

  CoefVector() = default;
  explicit CoefVector(Eigen::VectorXd b);

  Eigen::Index size() const { return beta.size(); }

  static CoefVector zeros(Eigen::Index p);
};

// Subset of source indices {1..K}, kept sorted and duplicate-free.
class InformativeSet {
 public:
  InformativeSet() = default;
  explicit InformativeSet(std::vector<int> members);

  static InformativeSet empty() { return InformativeSet(); }
  static InformativeSet all(int K);

  const std::vector<int>& members() const { return members_; }
  int size() const { return static_cast<int>(members_.size()); }
  bool contains(int k) const;
  bool operator==(const InformativeSet& other) const {
    return members_ == other.members_;
  }

 private:
  std::vector<int> members_;
};

// Checks all structural invariants: matching p across studies, matching
// row counts within each study, nonempty data, finite entries.
void validate_collection(const StudyCollection& c);

void validate_dataset(const Dataset& d);

double l1_distance(const CoefVector& a, const CoefVector& b);

}  // namespace tlqr
