#include "hgc/linalg.hpp"

namespace hgc {

OnesSolution solve_for_ones(const Matrix& rows) {
  OnesSolution out;
  const Vector ones = Vector::Ones(rows.cols());
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(rows.transpose());
  out.coefficients = cod.solve(ones);
  out.residual = (rows.transpose() * out.coefficients - ones).lpNorm<Eigen::Infinity>();
  return out;
}

Vector null_vector(const Matrix& rows, int cols) {
  if (rows.rows() == 0) return Vector::Ones(cols).normalized();
  Eigen::JacobiSVD<Matrix> svd(rows, Eigen::ComputeFullV);
  Vector v = svd.matrixV().col(cols - 1);
  // Fix the sign so the construction does not depend on SVD conventions.
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0) v = -v;
  return v;
}

}  // namespace hgc
