// Thin wrappers over the LAPACK symmetric eigensolvers.
#pragma once

#include <Eigen/Core>

namespace fluxmol {

// Full eigendecomposition of a real symmetric matrix (divide and conquer).
// Eigenvalues come back ascending; eigenvectors are the columns of `vectors`.
// Throws numeric_failure if LAPACK reports a breakdown.
void sym_eig(const Eigen::MatrixXd& a, Eigen::VectorXd& values, Eigen::MatrixXd& vectors);

// Same for a symmetric tridiagonal matrix given by its diagonal and
// subdiagonal.  Used by the iterative eigensolver's inner problem.
void tridiag_eig(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub,
                 Eigen::VectorXd& values, Eigen::MatrixXd& vectors);

}  // namespace fluxmol
