#include "fluidq/buffer1.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "fluidq/errors.hpp"
#include "fluidq/linalg.hpp"

namespace fluidq {

namespace {

std::vector<int> columns_of(const PhaseSet& within, const PhaseSet& wanted) {
  std::vector<int> cols;
  for (int j : wanted) {
    for (size_t k = 0; k < within.size(); ++k) {
      if (within[k] == j) cols.push_back(k);
    }
  }
  return cols;
}

Matrix take_columns(const Matrix& m, const std::vector<int>& cols) {
  Matrix out(m.rows(), cols.size());
  for (size_t c = 0; c < cols.size(); ++c) out.col(c) = m.col(cols[c]);
  return out;
}

RowVector take(const RowVector& v, const std::vector<int>& cols) {
  RowVector out(cols.size());
  for (size_t c = 0; c < cols.size(); ++c) out(c) = v(cols[c]);
  return out;
}

// Outflow of sticky weights at one level towards a set of phases.
RowVector sticky_flux(const FluxInputs& in, const Matrix& T, Level level, const PhaseSet& to) {
  RowVector out = RowVector::Zero(to.size());
  for (size_t k = 0; k < in.chain->states.size(); ++k) {
    const BoundaryState& s = in.chain->states[k];
    if (!s.sticky() || s.level != level) continue;
    for (size_t c = 0; c < to.size(); ++c) out(c) += in.weights(k) * T(s.phase, to[c]);
  }
  return out;
}

RowVector divide(const RowVector& v, const PhaseSet& set, const Vector& rates) {
  RowVector out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) out(k) = v(k) / rates(set[k]);
  return out;
}

// Maps a row ordered (plus, minus) onto phases 0..N, dividing by |rate|.
RowVector to_phases(const RowVector& v, const PhaseSet& plus, const PhaseSet& minus,
                    const Vector& rates, int N) {
  RowVector out = RowVector::Zero(N + 1);
  for (size_t k = 0; k < plus.size(); ++k) out(plus[k]) += v(k) / rates(plus[k]);
  for (size_t k = 0; k < minus.size(); ++k) {
    out(minus[k]) += v(plus.size() + k) / rates(minus[k]);
  }
  return out;
}

RowVector concat(const RowVector& a, const RowVector& b) {
  RowVector out(a.size() + b.size());
  out.head(a.size()) = a;
  out.tail(b.size()) = b;
  return out;
}

struct FluxTerms {
  RowVector a_u, a_d, extra;
  Matrix psi_ud;    // band-2 return, rows S_u_star, cols S_d_star
  Matrix psih_du;   // band-1 return, rows S_d_star, cols S_u_star
};

FluxTerms flux_terms(const FluxInputs& in) {
  const PhasePartition& part = *in.part;
  const ModelParams& p = *in.params;
  const Matrix T = build_generator(p.N, p.alpha1, p.beta1);
  const ChainBlocks& b = *in.blocks;
  FluxTerms t;
  const std::vector<int> su_in_p1 = columns_of(part.S_plus_1, part.S_u_star);
  const std::vector<int> sd_in_m2 = columns_of(part.S_minus_2, part.S_d_star);
  const RowVector up_zero = sticky_flux(in, T, Level::kZero, part.S_plus_1);
  t.a_u = sticky_flux(in, T, Level::kStar, part.S_u_star) +
          take(up_zero * b.band1.Lambda_pp, su_in_p1);
  t.a_d = sticky_flux(in, T, Level::kStar, part.S_d_star);
  t.extra = RowVector::Zero(part.S_d_star.size());
  if (p.finite()) {
    const RowVector h = sticky_flux(in, T, Level::kTop, part.S_minus_2);
    t.extra = take(h * b.band2.LambdaHat_mm, sd_in_m2);
  }
  t.psi_ud = take_columns(b.band2.Psi_pm, sd_in_m2);
  t.psih_du = take_columns(b.band1.PsiHat_mp, su_in_p1);
  return t;
}

DensityCoefficients solve_fluxes(const FluxInputs& in) {
  const PhasePartition& part = *in.part;
  const ModelParams& p = *in.params;
  const Matrix T = build_generator(p.N, p.alpha1, p.beta1);
  const FluxTerms t = flux_terms(in);

  DensityCoefficients out;
  out.up_zero = sticky_flux(in, T, Level::kZero, part.S_plus_1);
  // g (I - Psi_ud PsiHat_du) = a_u + (a_d + extra) PsiHat_du
  const Eigen::Index nu = part.S_u_star.size();
  const Matrix lhs = Matrix::Identity(nu, nu) - t.psi_ud * t.psih_du;
  const RowVector rhs = t.a_u + (t.a_d + t.extra) * t.psih_du;
  out.g = rhs * checked_inverse(lhs, "density coefficient system");
  out.f = t.a_d + out.g * t.psi_ud + t.extra;
  if (p.finite()) out.h = sticky_flux(in, T, Level::kTop, part.S_minus_2);
  return out;
}

void require(const FluxInputs& in) {
  if (!in.params || !in.part || !in.chain || !in.blocks) {
    throw std::invalid_argument("FluxInputs: missing component");
  }
}

}  // namespace

RowVector solve_sticky_weights(const CensoredChain& cens) {
  return left_null_vector(cens.theta, cens.delta_s.size() ? cens.delta_s.maxCoeff() : 1.0);
}

DensityCoefficients density_coeffs_infinite(const FluxInputs& in) {
  require(in);
  if (in.params->finite()) throw std::invalid_argument("density_coeffs_infinite: finite model");
  DensityCoefficients c = solve_fluxes(in);
  const ModelParams& p = *in.params;
  Vector r1(p.N + 1), r2(p.N + 1);
  for (int i = 0; i <= p.N; ++i) {
    r1(i) = std::abs(band_rate(p, 1, i));
    r2(i) = std::abs(band_rate(p, 2, i));
  }
  c.u = divide(c.g, in.part->S_u_star, r2);
  c.d = divide(c.f, in.part->S_d_star, r1);
  return c;
}

DensityCoefficients density_coeffs_finite(const FluxInputs& in) {
  require(in);
  if (!in.params->finite()) throw std::invalid_argument("density_coeffs_finite: infinite model");
  DensityCoefficients c = solve_fluxes(in);
  const ModelParams& p = *in.params;
  Vector r1(p.N + 1), r2(p.N + 1);
  for (int i = 0; i <= p.N; ++i) {
    r1(i) = std::abs(band_rate(p, 1, i));
    r2(i) = std::abs(band_rate(p, 2, i));
  }
  c.gamma1 = divide(c.f, in.part->S_d_star, r1);
  c.gamma2 = divide(c.g, in.part->S_u_star, r2);
  c.gamma3 = divide(c.h, in.part->S_minus_2, r2);
  return c;
}

double density_residual(const FluxInputs& in, const DensityCoefficients& c) {
  require(in);
  const FluxTerms t = flux_terms(in);
  const RowVector g_check = t.a_u + c.f * t.psih_du;
  const RowVector f_check = t.a_d + c.g * t.psi_ud + t.extra;
  double res = 0.0;
  if (g_check.size()) res = std::max(res, (g_check - c.g).cwiseAbs().maxCoeff());
  if (f_check.size()) res = std::max(res, (f_check - c.f).cwiseAbs().maxCoeff());
  return res;
}

StationaryBuffer1 StationaryBuffer1::solve(const ModelParams& params, double tol) {
  const ValidationReport report = check_assumptions(params, AssumptionScope::kBuffer1);
  if (!report.ok()) throw ModelError("invalid model: " + report.summary());

  StationaryBuffer1 s;
  s.params_ = params;
  s.part_ = partition_states(params);
  s.T_ = build_generator(params.N, params.alpha1, params.beta1);
  s.band1_ = band_blocks(params, s.part_, 1);
  s.band2_ = band_blocks(params, s.part_, 2);
  s.ops1_ = passage_operators(s.band1_, 0.0, tol);
  s.ops2_ = passage_operators(s.band2_, 0.0, tol);

  s.blocks_.jump = jump_matrix(s.T_);
  s.blocks_.band1 = finite_passage(s.ops1_, params.x_star);
  if (params.V) {
    s.blocks_.band2 = finite_passage(s.ops2_, *params.V - params.x_star);
  } else {
    s.blocks_.band2.Psi_pm = s.ops2_.Psi;
  }
  s.chain_ = assemble_omega(params, s.part_, s.blocks_);
  require_stochastic(s.chain_);
  s.cens_ = censor(s.chain_, s.T_);
  s.x_s_ = solve_sticky_weights(s.cens_);
  if (s.x_s_.minCoeff() < -1e-10) throw NumericalError("negative sticky weight");
  s.x_s_ = s.x_s_.cwiseMax(0.0);

  FluxInputs in;
  in.params = &s.params_;
  in.part = &s.part_;
  in.chain = &s.chain_;
  in.blocks = &s.blocks_;
  in.weights = RowVector::Zero(s.chain_.states.size());
  for (size_t k = 0; k < s.cens_.sticky.size(); ++k) in.weights(s.cens_.sticky[k]) = s.x_s_(k);
  s.coeffs_ = params.V ? density_coeffs_finite(in) : density_coeffs_infinite(in);

  const double band2_end = params.V ? *params.V - params.x_star
                                    : std::numeric_limits<double>::infinity();
  const double total = s.x_s_.sum() + s.band1_integral(params.x_star).sum() +
                       s.band2_integral(band2_end).sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericalError("normalization: non-finite total mass");
  }
  s.kappa_ = 1.0 / total;
  return s;
}

RowVector StationaryBuffer1::band1_integral(double x) const {
  const FiniteVisits v = integrated_visits_finite(ops1_, params_.x_star, x);
  const RowVector flux = coeffs_.up_zero * v.from_bottom + coeffs_.f * v.from_top;
  return to_phases(flux, part_.S_plus_1, part_.S_minus_1, band1_.C_full, params_.N);
}

RowVector StationaryBuffer1::band2_integral(double w) const {
  RowVector flux;
  if (params_.V) {
    const FiniteVisits v = integrated_visits_finite(ops2_, *params_.V - params_.x_star, w);
    flux = coeffs_.g * v.from_bottom + coeffs_.h * v.from_top;
  } else {
    Matrix ik;
    if (std::isinf(w)) {
      ik = -checked_inverse(ops2_.K, "band-2 integral (unstable model?)");
    } else {
      ik = integrated_exponential(ops2_.K, w);
    }
    const RowVector gk = coeffs_.g * ik;
    flux = concat(gk, gk * ops2_.Psi);
  }
  return to_phases(flux, part_.S_plus_2, part_.S_minus_2, band2_.C_full, params_.N);
}

double StationaryBuffer1::weight_at(Level level) const {
  double w = 0.0;
  for (size_t k = 0; k < cens_.sticky.size(); ++k) {
    if (chain_.states[cens_.sticky[k]].level == level) w += x_s_(k);
  }
  return w;
}

double StationaryBuffer1::mass_at(Level level) const { return kappa_ * weight_at(level); }

RowVector StationaryBuffer1::density(double x) const {
  const double xs = params_.x_star;
  if (x > 0.0 && x < xs) {
    const FiniteVisits v = expected_visits_finite(ops1_, xs, x);
    const RowVector flux = coeffs_.up_zero * v.from_bottom + coeffs_.f * v.from_top;
    return kappa_ * to_phases(flux, part_.S_plus_1, part_.S_minus_1, band1_.C_full, params_.N);
  }
  if (x > xs && (!params_.V || x < *params_.V)) {
    const double w = x - xs;
    RowVector flux;
    if (params_.V) {
      const FiniteVisits v = expected_visits_finite(ops2_, *params_.V - xs, w);
      flux = coeffs_.g * v.from_bottom + coeffs_.h * v.from_top;
    } else {
      const RowVector gk = coeffs_.g * expected_visits_infinite(ops2_.K, w);
      flux = concat(gk, gk * ops2_.Psi);
    }
    return kappa_ * to_phases(flux, part_.S_plus_2, part_.S_minus_2, band2_.C_full, params_.N);
  }
  throw std::invalid_argument(
      "density: x lies on a boundary level or outside the buffer; use the masses there");
}

double StationaryBuffer1::cdf(double x) const { return 1.0 - tail(x); }

double StationaryBuffer1::tail(double x) const {
  const double xs = params_.x_star;
  if (x < 0.0) return 1.0;
  if (params_.V && x >= *params_.V) return 0.0;
  if (x < xs) {
    const double below = weight_at(Level::kZero) + band1_integral(x).sum();
    return 1.0 - kappa_ * below;
  }
  const double w = x - xs;
  double above;
  if (params_.V) {
    const double b = *params_.V - xs;
    above = weight_at(Level::kTop) + band2_integral(b).sum() - band2_integral(w).sum();
  } else {
    const Matrix tail_int = matrix_exponential(ops2_.K * w) *
                            (-checked_inverse(ops2_.K, "band-2 tail (unstable model?)"));
    const RowVector gk = coeffs_.g * tail_int;
    above = to_phases(concat(gk, gk * ops2_.Psi), part_.S_plus_2, part_.S_minus_2,
                      band2_.C_full, params_.N)
                .sum();
  }
  return kappa_ * above;
}

double StationaryBuffer1::total_probability() const {
  const double b2 = params_.V ? *params_.V - params_.x_star
                              : std::numeric_limits<double>::infinity();
  return kappa_ * (x_s_.sum() + band1_integral(params_.x_star).sum() + band2_integral(b2).sum());
}

}  // namespace fluidq
