#include "fluidq/passage.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "fluidq/errors.hpp"
#include "fluidq/linalg.hpp"

namespace fluidq {

namespace {

Matrix identity(Eigen::Index n) { return Matrix::Identity(n, n); }

Matrix block2x2(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d) {
  Matrix out(a.rows() + c.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.topRightCorner(b.rows(), b.cols()) = b;
  out.bottomLeftCorner(c.rows(), c.cols()) = c;
  out.bottomRightCorner(d.rows(), d.cols()) = d;
  return out;
}

FinitePassage split(const Matrix& x, Eigen::Index p, Eigen::Index m) {
  FinitePassage f;
  f.Lambda_pp = x.topLeftCorner(p, p);
  f.Psi_pm = x.topRightCorner(p, m);
  f.PsiHat_mp = x.bottomLeftCorner(m, p);
  f.LambdaHat_mm = x.bottomRightCorner(m, m);
  return f;
}

Matrix stacked(const FinitePassage& f) {
  return block2x2(f.Lambda_pp, f.Psi_pm, f.PsiHat_mp, f.LambdaHat_mm);
}

bool admissible(const FinitePassage& f) {
  const Matrix x = stacked(f);
  if (!x.allFinite()) return false;
  if (x.size() == 0) return true;
  return x.minCoeff() >= -1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff());
}

}  // namespace

PassageOperators compute_operators(const BandBlocks& b, const Matrix& psi,
                                   const Matrix& psi_hat, double s) {
  const Vector inv_p = b.C_plus.cwiseInverse();
  const Vector inv_m = b.C_minus.cwiseInverse();
  const Matrix Tpp = b.T_pp - s * identity(b.T_pp.rows());
  const Matrix Tmm = b.T_mm - s * identity(b.T_mm.rows());
  PassageOperators ops;
  ops.s = s;
  ops.Psi = psi;
  ops.PsiHat = psi_hat;
  ops.U = inv_m.asDiagonal() * Tmm + inv_m.asDiagonal() * b.T_mp * psi;
  ops.UHat = inv_p.asDiagonal() * Tpp + inv_p.asDiagonal() * b.T_pm * psi_hat;
  ops.K = inv_p.asDiagonal() * Tpp + psi * inv_m.asDiagonal() * b.T_mp;
  ops.KHat = inv_m.asDiagonal() * Tmm + psi_hat * inv_p.asDiagonal() * b.T_pm;
  return ops;
}

PassageOperators passage_operators(const BandBlocks& blocks, double s, double tol) {
  RiccatiOptions opts;
  opts.tol = tol;
  const Matrix psi = solve_minimal(riccati_problem(blocks, s), opts).X;
  const Matrix psi_hat = solve_minimal(riccati_hat_problem(blocks, s), opts).X;
  return compute_operators(blocks, psi, psi_hat, s);
}

std::optional<PassageOperators> try_passage_operators(const BandBlocks& blocks, double s,
                                                      double tol, long max_functional) {
  RiccatiOptions opts;
  opts.tol = tol;
  opts.max_functional = max_functional;
  auto psi = try_solve_minimal(riccati_problem(blocks, s), opts);
  if (!psi) return std::nullopt;
  auto psi_hat = try_solve_minimal(riccati_hat_problem(blocks, s), opts);
  if (!psi_hat) return std::nullopt;
  return compute_operators(blocks, psi->X, psi_hat->X, s);
}

FinitePassage finite_passage(const PassageOperators& ops, double b) {
  if (!(b > 0.0)) throw NumericalError("finite_passage: band length must be positive");
  const Eigen::Index p = ops.Psi.rows();
  const Eigen::Index m = ops.Psi.cols();
  const Matrix eU = matrix_exponential(ops.U * b);
  const Matrix eUh = matrix_exponential(ops.UHat * b);
  const Matrix lhs = block2x2(eUh, ops.Psi, ops.PsiHat, eU);
  const Matrix rhs = block2x2(identity(p), ops.Psi * eU, ops.PsiHat * eUh, identity(m));
  return split(lhs * checked_inverse(rhs, "finite_passage"), p, m);
}

FinitePassage finite_passage_direct(const BandBlocks& blocks, double b, double s) {
  if (!(b > 0.0)) throw NumericalError("finite_passage_direct: band length must be positive");
  const Eigen::Index m = blocks.minus.size();
  const Eigen::Index p = blocks.plus.size();
  // Phases ordered (minus, plus); d/dx g = -C^{-1}(T - sI) g with signed C.
  Matrix T = block2x2(blocks.T_mm, blocks.T_mp, blocks.T_pm, blocks.T_pp);
  T -= s * identity(m + p);
  Vector signed_rates(m + p);
  signed_rates.head(m) = -blocks.C_minus;
  signed_rates.tail(p) = blocks.C_plus;
  const Matrix A = -(signed_rates.cwiseInverse().asDiagonal() * T);
  const Eigen::Index n = m + p;
  const Eigen::Index rhs_cols = p + m;

  // Multiple shooting: g(x_{k+1}) = e^{A h} g(x_k) on K pieces with
  // |A| h <= 2, plus g_minus(0) = [0 | I] and g_plus(b) = [I | 0]. A single
  // e^{A b} loses all accuracy once the band length times the fastest
  // mode is large.
  const double norm = A.size() ? A.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
  const double pieces = std::ceil(norm * b / 2.0);
  if (!(pieces <= 256.0)) throw NumericalError("finite_passage_direct: band too stiff for a direct solve");
  const int K = std::max(1, static_cast<int>(pieces));
  const Matrix E = matrix_exponential(A * (b / K));
  const Eigen::Index unknowns = n * (K + 1);
  Matrix sys = Matrix::Zero(unknowns, unknowns);
  Matrix rhs = Matrix::Zero(unknowns, rhs_cols);
  for (int k = 0; k < K; ++k) {
    sys.block(n * k, n * k, n, n) = E;
    sys.block(n * k, n * (k + 1), n, n) = -identity(n);
  }
  const Eigen::Index bc = n * K;
  sys.block(bc, 0, m, m) = identity(m);
  rhs.block(bc, p, m, m) = identity(m);
  sys.block(bc + m, n * K + m, p, p) = identity(p);
  rhs.block(bc + m, 0, p, p) = identity(p);

  Eigen::PartialPivLU<Matrix> lu(sys);
  if (!(lu.rcond() >= 1e-14)) {
    throw NumericalError("singular matrix in finite_passage_direct");
  }
  const Matrix g = lu.solve(rhs);
  const Matrix g_plus0 = g.block(m, 0, p, rhs_cols);
  const Matrix g_minus_b = g.block(n * K, 0, m, rhs_cols);

  FinitePassage f;
  f.Lambda_pp = g_plus0.leftCols(p);
  f.Psi_pm = g_plus0.rightCols(m);
  f.PsiHat_mp = g_minus_b.leftCols(p);
  f.LambdaHat_mm = g_minus_b.rightCols(m);
  return f;
}

std::optional<FinitePassage> try_finite_passage_lst(const BandBlocks& blocks, double b,
                                                    double s, double tol) {
  if (auto ops = try_passage_operators(blocks, s, tol)) {
    const Matrix loop = ops->Psi * matrix_exponential(ops->U * b) * ops->PsiHat *
                        matrix_exponential(ops->UHat * b);
    if (spectral_radius(loop) < 1.0) {
      try {
        FinitePassage f = finite_passage(*ops, b);
        if (admissible(f)) return f;
      } catch (const NumericalError&) {
      }
    }
  }
  try {
    FinitePassage f = finite_passage_direct(blocks, b, s);
    if (admissible(f)) return f;
  } catch (const NumericalError&) {
  }
  return std::nullopt;
}

FinitePassage finite_passage_lst(const BandBlocks& blocks, double b, double s, double tol) {
  auto f = try_finite_passage_lst(blocks, b, s, tol);
  if (!f) throw TransformDivergence("finite-band transform diverges at s = " + std::to_string(s));
  return *f;
}

Matrix expected_visits_infinite(const Matrix& K, double w) {
  if (w < 0.0) throw NumericalError("expected_visits_infinite: w must be nonnegative");
  return matrix_exponential(K * w);
}

FiniteVisits expected_visits_finite(const PassageOperators& ops, double b, double w) {
  if (!(w >= 0.0 && w <= b)) throw NumericalError("expected_visits_finite: need 0 <= w <= b");
  const Eigen::Index p = ops.Psi.rows();
  const Eigen::Index m = ops.Psi.cols();
  const Matrix eKb = matrix_exponential(ops.K * b);
  const Matrix eKhb = matrix_exponential(ops.KHat * b);
  const Matrix lhs = block2x2(identity(p), eKb * ops.Psi, eKhb * ops.PsiHat, identity(m));
  const Matrix eKw = matrix_exponential(ops.K * w);
  const Matrix eKhw = matrix_exponential(ops.KHat * (b - w));
  const Matrix rhs = block2x2(eKw, eKw * ops.Psi, eKhw * ops.PsiHat, eKhw);
  const Matrix x = checked_inverse(lhs, "expected_visits_finite") * rhs;
  return FiniteVisits{x.topRows(p), x.bottomRows(m)};
}

FiniteVisits integrated_visits_finite(const PassageOperators& ops, double b, double x) {
  if (!(x >= 0.0 && x <= b)) throw NumericalError("integrated_visits_finite: need 0 <= x <= b");
  const Eigen::Index p = ops.Psi.rows();
  const Eigen::Index m = ops.Psi.cols();
  const Matrix eKb = matrix_exponential(ops.K * b);
  const Matrix eKhb = matrix_exponential(ops.KHat * b);
  const Matrix lhs = block2x2(identity(p), eKb * ops.Psi, eKhb * ops.PsiHat, identity(m));
  const Matrix ik = integrated_exponential(ops.K, x);
  const Matrix ikh = integrated_exponential(ops.KHat, b) - integrated_exponential(ops.KHat, b - x);
  const Matrix rhs = block2x2(ik, ik * ops.Psi, ikh * ops.PsiHat, ikh);
  const Matrix out = checked_inverse(lhs, "integrated_visits_finite") * rhs;
  return FiniteVisits{out.topRows(p), out.bottomRows(m)};
}

Matrix jump_matrix(const Matrix& T) {
  const Eigen::Index n = T.rows();
  Matrix P = Matrix::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (T(i, i) == 0.0) throw NumericalError("jump_matrix: zero diagonal entry");
    P.row(i) -= T.row(i) / T(i, i);
  }
  return P;
}

}  // namespace fluidq
