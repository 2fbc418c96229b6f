#pragma once

#include <Eigen/Dense>

namespace effifit {

/// Smallest eigenvalue of the symmetric part of M.
inline double min_eigenvalue(const Eigen::MatrixXd& M) {
  const Eigen::MatrixXd S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  return es.eigenvalues().minCoeff();
}

inline bool is_psd_eigen(const Eigen::MatrixXd& M, double tol) {
  return min_eigenvalue(M) >= -tol;
}

/// PSD test by attempted Cholesky factorization of M + tol*I.
inline bool is_psd_cholesky(const Eigen::MatrixXd& M, double tol) {
  const Eigen::MatrixXd S =
      0.5 * (M + M.transpose()) +
      tol * Eigen::MatrixXd::Identity(M.rows(), M.cols());
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  return llt.info() == Eigen::Success;
}

}  // namespace effifit
