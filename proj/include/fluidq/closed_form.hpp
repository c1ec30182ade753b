#pragma once

#include "fluidq/model.hpp"

namespace fluidq {

// Scalar closed forms for a single source (N = 1) and a finite Buffer 1.
// Used as a fast path for the tables and as a cross-check of the general
// block machinery.
//
// The scalar Riccati equations have roots 1 and r = beta (R1 - cap) /
// (alpha cap). The reported psi/psi_hat/u/u_hat/k/k_hat are the minimal
// solutions: psi = 1, psi_hat = r when the band drifts down (r <= 1), and
// psi = 1/r, psi_hat = 1 when it drifts up.
struct SingleSourceFinite {
  ModelParams params;
  double psi1 = 0, psi_hat1 = 0, u1 = 0, u_hat1 = 0, k1 = 0, k_hat1 = 0;
  double lambda_pp1 = 0, psi_pm1 = 0, psi_hat_mp1 = 0, lambda_hat_mm1 = 0;
  double psi2 = 0, psi_hat2 = 0, u2 = 0, u_hat2 = 0, k2 = 0, k_hat2 = 0;
  double lambda_pp2 = 0, psi_pm2 = 0, psi_hat_mp2 = 0, lambda_hat_mm2 = 0;
  Matrix omega_circle;  // over (0,s,0), (V,s,1)
  double x_s_zero = 1.0, x_s_top = 0;
  double gamma1 = 0, gamma2 = 0, gamma3 = 0;
  double kappa = 0;

  double tail(double x) const;

 private:
  // Root r and exponent nu = -alpha / (R1 - cap) + beta / cap per band; the
  // passage and visit formulas hold with this root pair in either drift case.
  double r1_ = 0, nu1_ = 0, r2_ = 0, nu2_ = 0;

  double band1_mass(double x) const;  // unnormalized, over (0, x]
  double band2_mass(double w) const;  // unnormalized, over (x*, x* + w]
  friend SingleSourceFinite solve_single_source_finite(const ModelParams&);
};

SingleSourceFinite solve_single_source_finite(const ModelParams& params);

}  // namespace fluidq
