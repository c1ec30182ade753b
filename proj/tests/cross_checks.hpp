#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>

#include "fluidq/buffer1.hpp"
#include "fluidq/closed_form.hpp"
#include "fluidq/riccati.hpp"

namespace fluidq::testing {

// Largest gap between the general N-source pipeline and the scalar
// single-source formulas over every shared intermediate quantity, absolute
// for values up to 1 and relative above (the unnormalized flux coefficients
// reach the thousands).
inline double closed_form_gap(const ModelParams& p) {
  const StationaryBuffer1 g = StationaryBuffer1::solve(p);
  const SingleSourceFinite s = solve_single_source_finite(p);
  const PassageOperators& o1 = g.band1_operators();
  const PassageOperators& o2 = g.band2_operators();
  const FinitePassage& f1 = g.blocks().band1;
  const FinitePassage& f2 = g.blocks().band2;
  const DensityCoefficients& c = g.coefficients();
  double gap = 0.0;
  auto cmp = [&](double a, double b) {
    gap = std::max(gap, std::abs(a - b) / std::max(1.0, std::abs(b)));
  };
  cmp(o1.Psi(0, 0), s.psi1);
  cmp(o1.PsiHat(0, 0), s.psi_hat1);
  cmp(o1.U(0, 0), s.u1);
  cmp(o1.UHat(0, 0), s.u_hat1);
  cmp(o1.K(0, 0), s.k1);
  cmp(o1.KHat(0, 0), s.k_hat1);
  cmp(o2.Psi(0, 0), s.psi2);
  cmp(o2.PsiHat(0, 0), s.psi_hat2);
  cmp(o2.U(0, 0), s.u2);
  cmp(o2.UHat(0, 0), s.u_hat2);
  cmp(o2.K(0, 0), s.k2);
  cmp(o2.KHat(0, 0), s.k_hat2);
  cmp(f1.Lambda_pp(0, 0), s.lambda_pp1);
  cmp(f1.Psi_pm(0, 0), s.psi_pm1);
  cmp(f1.PsiHat_mp(0, 0), s.psi_hat_mp1);
  cmp(f1.LambdaHat_mm(0, 0), s.lambda_hat_mm1);
  cmp(f2.Lambda_pp(0, 0), s.lambda_pp2);
  cmp(f2.Psi_pm(0, 0), s.psi_pm2);
  cmp(f2.PsiHat_mp(0, 0), s.psi_hat_mp2);
  cmp(f2.LambdaHat_mm(0, 0), s.lambda_hat_mm2);
  const Matrix& oc = g.censored().omega_circle;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) cmp(oc(i, j), s.omega_circle(i, j));
  cmp(g.sticky_weights()(0), s.x_s_zero);
  cmp(g.sticky_weights()(1), s.x_s_top);
  cmp(c.gamma1(0), s.gamma1);
  cmp(c.gamma2(0), s.gamma2);
  cmp(c.gamma3(0), s.gamma3);
  cmp(g.kappa(), s.kappa);
  for (double x : {0.5, 1.5, 2.0, 3.0}) cmp(g.tail(x), s.tail(x));
  return gap;
}

// Entrywise (Jacobi) monotone iteration from zero:
//   X_ij <- (A + B_off X + X C_off + X D X)_ij / (-B_ii - C_jj).
// Converges upward to the minimal nonnegative solution.
inline Matrix jacobi_minimal(const RiccatiProblem& p, int max_iter = 2000000, double tol = 1e-14) {
  Matrix Boff = p.B, Coff = p.C;
  Boff.diagonal().setZero();
  Coff.diagonal().setZero();
  Matrix X = Matrix::Zero(p.A.rows(), p.A.cols());
  for (int it = 0; it < max_iter; ++it) {
    const Matrix rhs = p.A + Boff * X + X * Coff + X * p.D * X;
    Matrix next(X.rows(), X.cols());
    for (int i = 0; i < X.rows(); ++i)
      for (int j = 0; j < X.cols(); ++j) next(i, j) = rhs(i, j) / (-p.B(i, i) - p.C(j, j));
    const double step = next.size() ? (next - X).cwiseAbs().maxCoeff() : 0.0;
    X = next;
    if (step < tol) break;
  }
  return X;
}

// Masses plus the density integrated by adaptive Gauss-Kronrod quadrature.
inline double quadrature_total(const StationaryBuffer1& s) {
  using boost::math::quadrature::gauss_kronrod;
  const ModelParams& p = s.params();
  auto dens = [&](double x) { return s.density(x).sum(); };
  double total = s.mass_at(Level::kZero) + s.mass_at(Level::kStar) + s.mass_at(Level::kTop);
  total += gauss_kronrod<double, 61>::integrate(dens, 0.0, p.x_star, 15, 1e-13);
  const double top = p.V ? *p.V : std::numeric_limits<double>::infinity();
  total += gauss_kronrod<double, 61>::integrate(dens, p.x_star, top, 15, 1e-13);
  return total;
}

}  // namespace fluidq::testing
