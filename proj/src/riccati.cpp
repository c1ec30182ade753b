#include "fluidq/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>
#include <unsupported/Eigen/KroneckerProduct>

#include "fluidq/errors.hpp"
#include "fluidq/linalg.hpp"

namespace fluidq {

namespace {

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double problem_scale(const RiccatiProblem& p) {
  return std::max({1.0, max_abs(p.A), max_abs(p.B), max_abs(p.C), max_abs(p.D)});
}

Matrix residual_matrix(const RiccatiProblem& p, const Matrix& x) {
  return p.A + p.B * x + x * p.C + x * p.D * x;
}

bool diverged(const Matrix& x) {
  if (!x.allFinite()) return true;
  const double big = max_abs(x);
  if (big > 1e12) return true;
  return x.size() && x.minCoeff() < -1e-10 * std::max(1.0, big);
}

Matrix clamp_nonnegative(Matrix x) { return x.cwiseMax(0.0); }

}  // namespace

double riccati_residual(const RiccatiProblem& p, const Matrix& x) {
  return max_abs(residual_matrix(p, x));
}

std::optional<RiccatiSolution> try_solve_minimal(const RiccatiProblem& p,
                                                 const RiccatiOptions& opts) {
  RiccatiSolution sol;
  sol.X = Matrix::Zero(p.A.rows(), p.A.cols());
  if (p.A.size() == 0) return sol;

  const double scale = problem_scale(p);
  const double target = opts.tol * scale;
  Matrix x = sol.X;
  for (int it = 0; it < opts.max_newton; ++it) {
    const Matrix r = residual_matrix(p, x);
    const double res = max_abs(r);
    if (res <= target) {
      sol.X = clamp_nonnegative(x);
      sol.residual = riccati_residual(p, sol.X);
      sol.iterations = it;
      return sol;
    }
    Matrix h;
    try {
      h = solve_sylvester(p.B + x * p.D, p.C + p.D * x, -r);
    } catch (const NumericalError&) {
      break;
    }
    x += h;
    if (diverged(x)) return std::nullopt;
    if (max_abs(h) <= 1e-15 * std::max(1.0, max_abs(x)) && res <= 1e-8 * scale) {
      // Stagnation at round-off level.
      sol.X = clamp_nonnegative(x);
      sol.residual = riccati_residual(p, sol.X);
      sol.iterations = it + 1;
      return sol;
    }
  }

  // Fixed point X <- -(B (+) C)^{-1} (A + X D X), monotone from zero.
  const Eigen::Index m = p.A.rows();
  const Eigen::Index n = p.A.cols();
  const Matrix op = Eigen::kroneckerProduct(Matrix::Identity(n, n), p.B) +
                    Eigen::kroneckerProduct(p.C.transpose(), Matrix::Identity(m, m));
  Eigen::PartialPivLU<Matrix> lu(op);
  if (!std::isfinite(lu.rcond()) || lu.rcond() < 1e-14) return std::nullopt;
  x.setZero();
  for (long it = 0; it < opts.max_functional; ++it) {
    const Matrix rhs = -(p.A + x * p.D * x);
    Vector v = lu.solve(Eigen::Map<const Vector>(rhs.data(), rhs.size()));
    Matrix next = Eigen::Map<Matrix>(v.data(), m, n);
    if (diverged(next)) return std::nullopt;
    x.swap(next);
    if ((it & 15) == 15 || it < 16) {
      const double res = riccati_residual(p, x);
      if (res <= target) {
        sol.X = clamp_nonnegative(x);
        sol.residual = riccati_residual(p, sol.X);
        sol.iterations = static_cast<int>(std::min<long>(it + 1, 2147483647L));
        sol.method = RiccatiMethod::kFunctional;
        return sol;
      }
    }
  }
  return std::nullopt;
}

RiccatiSolution solve_minimal(const RiccatiProblem& p, const RiccatiOptions& opts) {
  auto sol = try_solve_minimal(p, opts);
  if (!sol) {
    throw NumericalError("Riccati solver did not converge to a nonnegative solution");
  }
  return *sol;
}

RiccatiProblem riccati_problem(const BandBlocks& b, double s) {
  const Vector inv_p = b.C_plus.cwiseInverse();
  const Vector inv_m = b.C_minus.cwiseInverse();
  const Matrix Tpp = b.T_pp - s * Matrix::Identity(b.T_pp.rows(), b.T_pp.cols());
  const Matrix Tmm = b.T_mm - s * Matrix::Identity(b.T_mm.rows(), b.T_mm.cols());
  RiccatiProblem p;
  p.A = inv_p.asDiagonal() * b.T_pm;
  p.B = inv_p.asDiagonal() * Tpp;
  p.C = inv_m.asDiagonal() * Tmm;
  p.D = inv_m.asDiagonal() * b.T_mp;
  return p;
}

RiccatiProblem riccati_hat_problem(const BandBlocks& b, double s) {
  const RiccatiProblem up = riccati_problem(b, s);
  return RiccatiProblem{up.D, up.C, up.B, up.A};
}

Matrix solve_riccati(const BandBlocks& blocks, double tol) {
  RiccatiOptions opts;
  opts.tol = tol;
  return solve_minimal(riccati_problem(blocks), opts).X;
}

Matrix solve_riccati_hat(const BandBlocks& blocks, double tol) {
  RiccatiOptions opts;
  opts.tol = tol;
  return solve_minimal(riccati_hat_problem(blocks), opts).X;
}

Matrix solve_riccati_lst(const BandBlocks& blocks, double s, double tol, Direction dir) {
  RiccatiOptions opts;
  opts.tol = tol;
  const RiccatiProblem p =
      dir == Direction::kUp ? riccati_problem(blocks, s) : riccati_hat_problem(blocks, s);
  return solve_minimal(p, opts).X;
}

}  // namespace fluidq
