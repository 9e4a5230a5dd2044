#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace mlport::linalg {

/// Symmetric eigendecomposition with eigenvalues in descending order.
struct SymmetricEigen {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // column i pairs with values(i)
};

inline SymmetricEigen descending_eigen(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  SymmetricEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

/// Ratio of extreme eigenvalues of a symmetric matrix; +inf when the
/// smallest is not strictly positive.
inline double condition_number(const Eigen::VectorXd& descending_values) {
  if (descending_values.size() == 0) return std::numeric_limits<double>::infinity();
  const double hi = descending_values(0);
  const double lo = descending_values(descending_values.size() - 1);
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

inline double condition_number(const Eigen::MatrixXd& sym) {
  return condition_number(descending_eigen(sym).values);
}

inline bool is_positive_definite(const Eigen::MatrixXd& sym) {
  if (sym.rows() != sym.cols() || sym.rows() == 0) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() != Eigen::Success) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0) > 0.0;
}

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

}  // namespace mlport::linalg
