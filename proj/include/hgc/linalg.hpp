#pragma once

#include <Eigen/Dense>

namespace hgc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct OnesSolution {
  Vector coefficients;
  // max_k |(coefficients^T * rows)_k - 1|
  double residual = 0.0;
};

// Minimum-norm least-squares solution c of c^T * rows = 1^T.
OnesSolution solve_for_ones(const Matrix& rows);

// Unit vector spanning the null space of a (r-1) x r matrix of full row rank.
// For an empty matrix (r == 1) returns [1].
Vector null_vector(const Matrix& rows, int cols);

}  // namespace hgc
