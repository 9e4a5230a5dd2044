#pragma once

#include "mlport/estimators/regression.hpp"

namespace mlport {

/// Principal components of X'X, reusable across component counts.
class PcrBasis {
 public:
  explicit PcrBasis(const RegressionDesign& d) : design_gram_(d.gram), xty_(d.xty), eig_(linalg::descending_eigen(d.gram)) {}

  /// Number of eigenvalues of X'X above the positivity tolerance.
  Eigen::Index positive_rank() const {
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < eig_.values.size(); ++i) {
      if (eig_.values(i) > tol::kPositiveEigen) ++r;
    }
    return r;
  }

  /// theta = P_k gamma with gamma = (X_k'X_k)^-1 X_k'y and X_k = X P_k.
  Eigen::VectorXd solve(Eigen::Index k) const {
    const Eigen::Index m = eig_.values.size();
    if (k < 1 || k > m) throw Error(ErrorKind::InvalidArgument, "component count must be in 1..m");
    if (positive_rank() < k) {
      throw Error(ErrorKind::RankDeficient, "X'X has fewer than " + std::to_string(k) + " positive eigenvalues");
    }
    const Eigen::MatrixXd pk = eig_.vectors.leftCols(k);
    const Eigen::MatrixXd reduced_gram = pk.transpose() * design_gram_ * pk;
    const Eigen::VectorXd gamma = reduced_gram.ldlt().solve(pk.transpose() * xty_);
    return pk * gamma;
  }

  /// Eigenvectors of X'X, descending eigenvalue order.
  const Eigen::MatrixXd& components() const noexcept { return eig_.vectors; }
  const Eigen::VectorXd& eigenvalues() const noexcept { return eig_.values; }

 private:
  Eigen::MatrixXd design_gram_;
  Eigen::VectorXd xty_;
  linalg::SymmetricEigen eig_;
};

inline Eigen::VectorXd pcr_weights(const RegressionDesign& d, Eigen::Index k) { return PcrBasis(d).solve(k); }

inline WeightVector estimate_pcr(const ReturnsMatrix& returns, double r_bar, Eigen::Index k) {
  return detail::labelled(pcr_weights(RegressionDesign::from_returns(returns.data(), r_bar), k), returns);
}

}  // namespace mlport
