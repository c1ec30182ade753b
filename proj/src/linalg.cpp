#include "fluidq/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "fluidq/errors.hpp"

namespace fluidq {

Matrix matrix_exponential(const Matrix& m) {
  if (m.rows() != m.cols()) throw NumericalError("matrix_exponential: not square");
  if (m.rows() == 0) return Matrix(0, 0);
  Matrix out = m.exp();
  if (!out.allFinite()) throw NumericalError("matrix_exponential: overflow");
  return out;
}

Matrix integrated_exponential(const Matrix& k, double x) {
  const Eigen::Index n = k.rows();
  if (n == 0) return Matrix(0, 0);
  Matrix aug = Matrix::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = k * x;
  aug.topRightCorner(n, n) = Matrix::Identity(n, n) * x;
  return matrix_exponential(aug).topRightCorner(n, n);
}

Matrix checked_inverse(const Matrix& m, const char* what) {
  if (m.rows() == 0) return Matrix(0, 0);
  Eigen::FullPivLU<Matrix> lu(m);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  lu.setThreshold(1e-14 * scale);
  if (!lu.isInvertible()) {
    throw NumericalError(std::string("singular matrix in ") + what);
  }
  return lu.inverse();
}

Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = b.rows();
  if (m == 0 || n == 0) return Matrix::Zero(m, n);
  // vec(A X + X B) = (I_n (x) A + B^T (x) I_m) vec(X), column-major vec.
  Matrix op = Eigen::kroneckerProduct(Matrix::Identity(n, n), a) +
              Eigen::kroneckerProduct(b.transpose(), Matrix::Identity(m, m));
  Eigen::FullPivLU<Matrix> lu(op);
  lu.setThreshold(1e-14 * std::max(1.0, op.cwiseAbs().maxCoeff()));
  if (!lu.isInvertible()) throw NumericalError("solve_sylvester: singular operator");
  Vector rhs = Eigen::Map<const Vector>(c.data(), c.size());
  Vector x = lu.solve(rhs);
  return Eigen::Map<Matrix>(x.data(), m, n);
}

double spectral_radius(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

PerronPair perron_left(const Matrix& m) {
  PerronPair out;
  if (m.rows() == 0) return out;
  Eigen::EigenSolver<Matrix> es(m.transpose(), true);
  const auto& vals = es.eigenvalues();
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < vals.size(); ++k) {
    if (vals(k).real() > vals(best).real()) best = k;
  }
  out.value = vals(best).real();
  Vector v = es.eigenvectors().col(best).real();
  if (v.sum() < 0.0) v = -v;
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = std::max(v(k), 0.0);
  const double total = v.sum();
  if (!(total > 0.0)) throw NumericalError("perron_left: no nonnegative eigenvector");
  out.left = (v / total).transpose();
  return out;
}

RowVector left_null_vector(const Matrix& g, double scale) {
  const Eigen::Index n = g.rows();
  if (n == 0) return RowVector(0);
  Matrix a = g.transpose();
  a.row(0).setZero();
  a(0, 0) = 1.0;
  Eigen::FullPivLU<Matrix> lu(a);
  lu.setThreshold(1e-11);
  if (!lu.isInvertible()) {
    throw NumericalError("left_null_vector: null space dimension exceeds 1");
  }
  Vector rhs = Vector::Zero(n);
  rhs(0) = 1.0;
  const RowVector x = lu.solve(rhs).transpose();
  if (scale <= 0.0) scale = g.cwiseAbs().maxCoeff();
  if ((x * g).cwiseAbs().maxCoeff() > 1e-8 * scale * x.cwiseAbs().maxCoeff()) {
    throw NumericalError("left_null_vector: matrix is nonsingular");
  }
  return x;
}

RowVector stationary_vector(const Matrix& p) {
  RowVector x = left_null_vector(p - Matrix::Identity(p.rows(), p.cols()), 1.0);
  return x / x.sum();
}

Matrix select(const Matrix& m, std::span<const int> rows, std::span<const int> cols) {
  Matrix out(rows.size(), cols.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < cols.size(); ++c) out(r, c) = m(rows[r], cols[c]);
  }
  return out;
}

Matrix censor_onto(const Matrix& omega, std::span<const int> keep) {
  std::vector<int> drop;
  for (int k = 0; k < omega.rows(); ++k) {
    if (std::find(keep.begin(), keep.end(), k) == keep.end()) drop.push_back(k);
  }
  const Matrix kk = select(omega, keep, keep);
  if (drop.empty()) return kk;
  const Matrix ke = select(omega, keep, drop);
  const Matrix ek = select(omega, drop, keep);
  const Matrix ee = select(omega, drop, drop);
  const Matrix gap = Matrix::Identity(ee.rows(), ee.cols()) - ee;
  Eigen::FullPivLU<Matrix> lu(gap);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) {
    throw NumericalError("censor: I - Omega_EE is singular (chain not irreducible)");
  }
  return kk + ke * lu.solve(ek);
}

}  // namespace fluidq
