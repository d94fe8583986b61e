#pragma once

#include <Eigen/Core>

namespace proxfact {

struct SymEigen {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // orthonormal columns, vectors.col(i) pairs values(i)
};

// Self-contained dense symmetric eigensolver: Householder reduction to
// tridiagonal form followed by implicit-shift QL, transformations
// accumulated. Input must be symmetric to 1e-10 relative; requires
// 1 <= top_k <= n. Throws InputError on bad input, NumericalError when the
// QL iteration fails to converge.
SymEigen symmetric_eigen(const Eigen::MatrixXd& a, int top_k);
SymEigen symmetric_eigen_full(const Eigen::MatrixXd& a);

}  // namespace proxfact
