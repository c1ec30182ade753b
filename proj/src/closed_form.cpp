#include "fluidq/closed_form.hpp"

#include <cmath>

#include "fluidq/errors.hpp"

namespace fluidq {

namespace {

struct ScalarBand {
  double r, nu;  // root pair used by the formulas
  double psi, psi_hat, u, u_hat, k, k_hat;  // minimal solutions
  double lambda_pp, psi_pm, psi_hat_mp, lambda_hat_mm;
};

// One band of capacity cap (c1 or c) and length b.
ScalarBand scalar_band(const ModelParams& p, double cap, double b) {
  ScalarBand s;
  const double a = p.alpha1, be = p.beta1, up = p.R1 - cap;
  s.r = be * up / (a * cap);
  s.nu = (-a * cap + be * up) / (cap * up);
  if (s.r <= 1.0) {
    s.psi = 1.0;
    s.psi_hat = s.r;
    s.u = 0.0;
    s.u_hat = s.nu;
    s.k = s.nu;
    s.k_hat = 0.0;
  } else {
    s.psi = 1.0 / s.r;
    s.psi_hat = 1.0;
    s.u = -s.nu;
    s.u_hat = 0.0;
    s.k = 0.0;
    s.k_hat = -s.nu;
  }
  const double e = std::exp(s.nu * b);
  const double den = 1.0 - s.r * e;
  s.lambda_pp = (1.0 - s.r) / (1.0 / e - s.r);
  s.psi_pm = (1.0 - e) / den;
  s.psi_hat_mp = (s.r - s.r * e) / den;
  s.lambda_hat_mm = (1.0 - s.r) / den;
  return s;
}

// Integral over [0, x] of e^{k w}.
double int_exp(double k, double x) {
  return std::abs(k * x) < 1e-12 ? x : std::expm1(k * x) / k;
}

// Integral over [0, x] of the scalar visit rows, weighted by the entry
// fluxes from the bottom (up) and from the top (down), divided by the
// (plus, minus) rates.
double visit_mass(double k, double psi_hat, double b, double x, double up, double down,
                  double rate_plus, double rate_minus) {
  const double ekb = std::exp(k * b);
  const double den = 1.0 - psi_hat * ekb;
  const double J = int_exp(k, x);
  const double np_plus = (J - x * psi_hat * ekb) / den;
  const double np_minus = (J - x * ekb) / den;
  const double nm_plus = psi_hat * (x - J) / den;
  const double nm_minus = (x - psi_hat * J) / den;
  return (up * np_plus + down * nm_plus) / rate_plus +
         (up * np_minus + down * nm_minus) / rate_minus;
}

}  // namespace

SingleSourceFinite solve_single_source_finite(const ModelParams& p) {
  if (p.N != 1 || !p.V) throw ModelError("closed form needs N = 1 and a finite V");
  const ValidationReport report = check_assumptions(p, AssumptionScope::kBuffer1);
  if (!report.ok()) throw ModelError("invalid model: " + report.summary());

  SingleSourceFinite out;
  out.params = p;
  const ScalarBand b1 = scalar_band(p, p.c1, p.x_star);
  const ScalarBand b2 = scalar_band(p, p.c, *p.V - p.x_star);
  out.r1_ = b1.r;
  out.nu1_ = b1.nu;
  out.psi1 = b1.psi;
  out.psi_hat1 = b1.psi_hat;
  out.u1 = b1.u;
  out.u_hat1 = b1.u_hat;
  out.k1 = b1.k;
  out.k_hat1 = b1.k_hat;
  out.lambda_pp1 = b1.lambda_pp;
  out.psi_pm1 = b1.psi_pm;
  out.psi_hat_mp1 = b1.psi_hat_mp;
  out.lambda_hat_mm1 = b1.lambda_hat_mm;
  out.r2_ = b2.r;
  out.nu2_ = b2.nu;
  out.psi2 = b2.psi;
  out.psi_hat2 = b2.psi_hat;
  out.u2 = b2.u;
  out.u_hat2 = b2.u_hat;
  out.k2 = b2.k;
  out.k_hat2 = b2.k_hat;
  out.lambda_pp2 = b2.lambda_pp;
  out.psi_pm2 = b2.psi_pm;
  out.psi_hat_mp2 = b2.psi_hat_mp;
  out.lambda_hat_mm2 = b2.lambda_hat_mm;

  const double loop = 1.0 - b2.psi_pm * b1.psi_hat_mp;
  Matrix oc(2, 2);
  oc(0, 0) = b1.psi_pm + b1.lambda_pp * b2.psi_pm * b1.lambda_hat_mm / loop;
  oc(0, 1) = b1.lambda_pp * b2.lambda_pp / loop;
  oc(1, 0) = b2.lambda_hat_mm * b1.lambda_hat_mm / loop;
  oc(1, 1) = b2.psi_hat_mp + b2.lambda_hat_mm * b1.psi_hat_mp * b2.lambda_pp / loop;
  out.omega_circle = oc;

  const double a = p.alpha1, be = p.beta1;
  out.x_s_top = be * (1.0 - oc(0, 0)) / (a * oc(1, 0));

  const double xv = out.x_s_top;
  const double den = 1.0 - b1.psi_hat_mp * b2.psi_pm;
  out.gamma1 = (be / p.c1 * b2.psi_pm * b1.lambda_pp + a * xv * b2.lambda_hat_mm / p.c1) / den;
  out.gamma2 = (be / (p.R1 - p.c) * b1.lambda_pp +
                a * xv / (p.R1 - p.c) * b1.psi_hat_mp * b2.lambda_hat_mm) /
               den;
  out.gamma3 = a / p.c * xv;

  const double total = out.x_s_zero + out.x_s_top + out.band1_mass(p.x_star) +
                       out.band2_mass(*p.V - p.x_star);
  out.kappa = 1.0 / total;
  return out;
}

double SingleSourceFinite::band1_mass(double x) const {
  const ModelParams& p = params;
  return visit_mass(nu1_, r1_, p.x_star, x, p.beta1, p.c1 * gamma1, p.R1 - p.c1, p.c1);
}

double SingleSourceFinite::band2_mass(double w) const {
  const ModelParams& p = params;
  return visit_mass(nu2_, r2_, *p.V - p.x_star, w, (p.R1 - p.c) * gamma2, p.c * gamma3,
                    p.R1 - p.c, p.c);
}

double SingleSourceFinite::tail(double x) const {
  const ModelParams& p = params;
  if (x < 0.0) return 1.0;
  if (x >= *p.V) return 0.0;
  if (x < p.x_star) return 1.0 - kappa * (x_s_zero + band1_mass(x));
  const double b = *p.V - p.x_star;
  return kappa * (x_s_top + band2_mass(b) - band2_mass(x - p.x_star));
}

}  // namespace fluidq
