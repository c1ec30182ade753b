#include "fluidq/buffer2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fluidq/errors.hpp"
#include "fluidq/laplace.hpp"
#include "fluidq/linalg.hpp"
#include "fluidq/passage.hpp"
#include "fluidq/riccati.hpp"

namespace fluidq {

namespace {

constexpr int kStehfestTerms = 14;

bool admissible(const Matrix& m) {
  if (!m.allFinite()) return false;
  return m.size() == 0 || m.minCoeff() >= -1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());
}

double inf() { return std::numeric_limits<double>::infinity(); }

}  // namespace

Vector compensating_rates(const std::vector<BoundaryState>& states, const ModelParams& params) {
  Vector a(states.size());
  for (size_t k = 0; k < states.size(); ++k) {
    const BoundaryState& s = states[k];
    if (s.level == Level::kTop) {
      a(k) = params.c;
    } else if (s.sticky()) {
      a(k) = s.phase * params.R1;
    } else if (s.level == Level::kStar && s.motion == Motion::kUp) {
      a(k) = params.c;
    } else {
      a(k) = params.c1;
    }
  }
  return a;
}

CompensatingSource::CompensatingSource(const ModelParams& params, double tol)
    : params_(params), tol_(tol) {
  const ValidationReport report = check_assumptions(params, AssumptionScope::kBuffer1);
  if (!report.ok()) throw ModelError("invalid model: " + report.summary());
  part_ = partition_states(params_);
  T_ = build_generator(params_.N, params_.alpha1, params_.beta1);
  band1_ = band_blocks(params_, part_, 1);
  band2_ = band_blocks(params_, part_, 2);
  chain_.finite = params_.finite();
  chain_.states = boundary_states(part_, chain_.finite);
  const int n = size();
  chain_.omega = Matrix::Zero(n, n);
  rates_ = compensating_rates(chain_.states, params_);

  group_of_.assign(n, -1);
  int band_group[2] = {-1, -1};
  for (int k = 0; k < n; ++k) {
    const RowGroup kind = row_group(chain_.states[k]);
    if (kind == RowGroup::kSticky) {
      group_of_[k] = groups_.size();
      groups_.push_back({kind, {k}});
      continue;
    }
    int& g = band_group[kind == RowGroup::kBand1 ? 0 : 1];
    if (g < 0) {
      g = groups_.size();
      groups_.push_back({kind, {}});
    }
    groups_[g].members.push_back(k);
    group_of_[k] = g;
  }
  abscissa_cache_.resize(groups_.size());
  // Filled eagerly so later const calls never write (sources are shared
  // across threads) and try_kernel can reject divergent shifts cheaply.
  for (size_t g = 0; g < groups_.size(); ++g) abscissa(static_cast<int>(g));
  omega_ = kernel_lst(0.0);
}

bool CompensatingSource::fill_group(int group, double s, BoundaryChain& work) const {
  const KernelGroup& g = groups_[group];
  ChainBlocks blocks;
  if (g.kind == RowGroup::kSticky) {
    const int i = chain_.states[g.members.front()].phase;
    const double q = -T_(i, i);
    if (!(s + q > 0.0)) return false;
    blocks.jump = Matrix::Zero(params_.N + 1, params_.N + 1);
    for (int j = 0; j <= params_.N; ++j) {
      if (j != i) blocks.jump(i, j) = T_(i, j) / (s + q);
    }
  } else if (g.kind == RowGroup::kBand1) {
    auto fp = try_finite_passage_lst(band1_, params_.x_star, s, tol_);
    if (!fp) return false;
    blocks.band1 = *fp;
  } else if (params_.V) {
    auto fp = try_finite_passage_lst(band2_, *params_.V - params_.x_star, s, tol_);
    if (!fp) return false;
    blocks.band2 = *fp;
  } else {
    RiccatiOptions opts;
    opts.tol = tol_;
    opts.max_functional = 20000;
    auto sol = try_solve_minimal(riccati_problem(band2_, s), opts);
    if (!sol || !admissible(sol->X)) return false;
    blocks.band2.Psi_pm = sol->X;
  }
  fill_omega_rows(params_, part_, blocks, g.kind, work);
  return true;
}

std::optional<Matrix> CompensatingSource::try_group_rows(int group, double s) const {
  BoundaryChain work;
  work.states = chain_.states;
  work.finite = chain_.finite;
  work.omega = Matrix::Zero(size(), size());
  if (!fill_group(group, s, work)) return std::nullopt;
  const std::vector<int>& members = groups_[group].members;
  Matrix rows(members.size(), size());
  for (size_t r = 0; r < members.size(); ++r) rows.row(r) = work.omega.row(members[r]);
  if (!admissible(rows)) return std::nullopt;
  return rows;
}

std::optional<Matrix> CompensatingSource::try_kernel(const Vector& shifts) const {
  if (shifts.size() != size()) throw std::invalid_argument("try_kernel: one shift per state");
  Matrix out(size(), size());
  for (size_t g = 0; g < groups_.size(); ++g) {
    const std::vector<int>& members = groups_[g].members;
    const double s = shifts(members.front());
    if (s < *abscissa_cache_[g]) return std::nullopt;
    auto rows = try_group_rows(g, s);
    if (!rows) return std::nullopt;
    for (size_t r = 0; r < members.size(); ++r) out.row(members[r]) = rows->row(r);
  }
  return out;
}

Matrix CompensatingSource::kernel_lst(double s) const {
  auto k = try_kernel(Vector::Constant(size(), s));
  if (!k) {
    std::ostringstream os;
    os << "kernel transform diverges at s = " << s;
    throw TransformDivergence(os.str());
  }
  return *k;
}

double CompensatingSource::abscissa(int group) const {
  if (abscissa_cache_[group]) return *abscissa_cache_[group];
  const KernelGroup& g = groups_[group];
  double result;
  if (g.kind == RowGroup::kSticky) {
    const int i = chain_.states[g.members.front()].phase;
    result = T_(i, i);
  } else {
    // Walk left from 0 while the transform stays finite, nonnegative and
    // entrywise nondecreasing as s decreases, then bisect the first failure.
    const double qmax = T_.diagonal().cwiseAbs().maxCoeff();
    auto valid = [&](double s, const Matrix& prev) -> std::optional<Matrix> {
      auto rows = try_group_rows(group, s);
      if (!rows) return std::nullopt;
      const double slack = 1e-9 * std::max(1.0, prev.cwiseAbs().maxCoeff());
      if ((rows->array() < prev.array() - slack).any()) return std::nullopt;
      return rows;
    };
    double hi = 0.0;
    Matrix prev = *try_group_rows(group, 0.0);
    double step = 1e-3 * qmax;
    double lo = hi - step;
    const double limit = -1e4 * qmax;
    while (true) {
      auto rows = valid(lo, prev);
      if (!rows) break;
      hi = lo;
      prev = *rows;
      step *= 1.5;
      lo = hi - step;
      if (lo < limit) throw NumericalError("abscissa search did not terminate");
    }
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      auto rows = valid(mid, prev);
      if (rows) {
        hi = mid;
        prev = *rows;
      } else {
        lo = mid;
      }
    }
    result = hi;
  }
  abscissa_cache_[group] = result;
  return result;
}

double eb_exponential(const ModelParams& params, double v) {
  if (!(v > 0.0)) throw std::invalid_argument("eb_exponential: v must be positive");
  const double R = params.R2, a = params.alpha2, b = params.beta2;
  if (b == 0.0) return 0.0;
  const double x = R * v - a - b;
  const double d = std::sqrt(x * x + 4.0 * b * R * v);
  if (x >= 0.0) return (x + d) / (2.0 * v);
  return 2.0 * b * R / (d - x);
}

std::optional<Matrix> try_phi_matrix(const CompensatingSource& src, double v, double u) {
  return src.try_kernel(v * (u - src.rates().array()).matrix());
}

Matrix phi_matrix(const CompensatingSource& src, double v, double u) {
  auto phi = try_phi_matrix(src, v, u);
  if (!phi) {
    std::ostringstream os;
    os << "Phi(" << v << ", " << u << ") is evaluated beyond the abscissa of convergence";
    throw TransformDivergence(os.str());
  }
  return *phi;
}

double chi(const CompensatingSource& src, double v, double u) {
  auto phi = try_phi_matrix(src, v, u);
  if (!phi) return inf();
  const Eigen::VectorXcd ev = phi->eigenvalues();
  double best = -inf();
  for (Eigen::Index k = 0; k < ev.size(); ++k) best = std::max(best, ev(k).real());
  return best;
}

double eb_compensating(const CompensatingSource& src, double v, double tol) {
  if (!(v > 0.0)) throw std::invalid_argument("eb_compensating: v must be positive");
  const double c = src.params().c;
  double lo = 0.0, hi = c;
  if (chi(src, v, lo) <= 1.0) return 0.0;
  if (chi(src, v, hi) > 1.0 + 1e-12) {
    throw NumericalError("eb_compensating: chi(Phi(v, c)) > 1, no root in [0, c]");
  }
  while (hi - lo > tol * std::max(1.0, c)) {
    const double mid = 0.5 * (lo + hi);
    if (chi(src, v, mid) > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double solve_eta(const CompensatingSource& src, double tol) {
  const ModelParams& p = src.params();
  auto F = [&](double v) { return eb_compensating(src, v) + p.N * eb_exponential(p, v) - p.c; };
  double lo = 1e-6;
  if (F(lo) >= 0.0) {
    throw NumericalError("solve_eta: system too heavily loaded for bracket (F(1e-6) >= 0)");
  }
  double hi = 2.0 * lo;
  while (F(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e8) {
      throw NumericalError(
          "solve_eta: unbounded decay, eb_c + N eb_e stays below c up to v = 1e8 "
          "(system too lightly loaded for bracket)");
    }
  }
  while (hi - lo > tol * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (F(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Vector sojourn_times(const CompensatingSource& src) {
  auto slope = [&](double h) -> Vector {
    const Vector up = src.kernel_lst(h).rowwise().sum();
    const Vector down = src.kernel_lst(-h).rowwise().sum();
    return -(up - down) / (2.0 * h);
  };
  const Vector d1 = slope(1e-4);
  const Vector d2 = slope(5e-5);
  return (4.0 * d2 - d1) / 3.0;
}

SourceWeights weights_and_eigen(const CompensatingSource& src, double eta, double eb_c) {
  SourceWeights w;
  w.omega = stationary_vector(src.omega());
  w.tau = sojourn_times(src);
  if ((w.tau.array() <= 0.0).any()) throw NumericalError("nonpositive expected sojourn time");
  const RowVector wt = w.omega.cwiseProduct(w.tau.transpose());
  w.p = wt / wt.sum();
  const PerronPair pp = perron_left(phi_matrix(src, eta, eb_c));
  w.perron = pp.value;
  w.h = pp.left;
  if (std::abs(pp.value - 1.0) > 1e-6) {
    std::ostringstream os;
    os << "Perron eigenvalue of Phi(eta, eb_c(eta)) is " << pp.value << ", not 1";
    throw NumericalError(os.str());
  }
  return w;
}

namespace {

// Inverted transforms of row i at one x: tail Omega_ij - Omega_ij(x), the
// density, and the numerator of f_ij, for every column j.
struct RowInversion {
  Vector tail, density, numerator;
};

RowInversion invert_row(const CompensatingSource& src, int i, double theta, const RowVector& base,
                        const RowVector& phi_row, double x) {
  static thread_local std::vector<double> weights;
  if (weights.empty()) weights = stehfest_weights(kStehfestTerms);
  const int g = src.group_of(i);
  const auto& members = src.groups()[g].members;
  const int r = std::find(members.begin(), members.end(), i) - members.begin();
  const int n = src.size();
  const double a = std::log(2.0) / x;
  RowInversion out{Vector::Zero(n), Vector::Zero(n), Vector::Zero(n)};
  for (int k = 1; k <= kStehfestTerms; ++k) {
    const double s = k * a;
    auto at_s = src.try_group_rows(g, s);
    auto shifted = src.try_group_rows(g, s - theta);
    if (!at_s || !shifted) throw TransformDivergence("transform inversion left the convergence domain");
    const RowVector row = at_s->row(r);
    const RowVector srow = shifted->row(r);
    const double wk = weights[k - 1];
    out.tail += wk * ((base - row) / s).transpose();
    out.density += wk * row.transpose();
    out.numerator += wk * ((phi_row - srow) / s).transpose();
  }
  out.tail *= a;
  out.density *= a;
  out.numerator *= a;
  return out;
}

std::vector<double> x_grid(double tau, int n) {
  const double x_max = 1.1 * tau * std::log(100.0);
  std::vector<double> xs(n);
  for (int k = 0; k < n; ++k) xs[k] = x_max * (k + 1) / n;
  return xs;
}

FailureShape classify(const std::vector<double>& lam, double tol) {
  double scale = 0.0;
  for (double v : lam) scale = std::max(scale, std::abs(v));
  const double eps = tol * std::max(1.0, scale);
  bool inc = true, dec = true;
  for (size_t k = 1; k < lam.size(); ++k) {
    const double d = lam[k] - lam[k - 1];
    if (d < -eps) inc = false;
    if (d > eps) dec = false;
  }
  if (inc && dec) return FailureShape::kConstant;
  if (inc) return FailureShape::kIncreasing;
  if (dec) return FailureShape::kDecreasing;
  return FailureShape::kMixed;
}

struct RowXi {
  std::vector<XiCoefficient> xi;  // per column
};

double theta_of(const CompensatingSource& src, const XiContext& ctx, int i) {
  return ctx.eta * (src.rates()(i) - ctx.eb_c);
}

RowXi row_xi(const CompensatingSource& src, const XiContext& ctx, const Matrix& phi, int i) {
  if (!ctx.weights) throw std::invalid_argument("xi_coefficients: weights are required");
  const SourceWeights& w = *ctx.weights;
  const int n = src.size();
  const double theta = theta_of(src, ctx, i);
  const double pref = w.h(i) * w.tau(i) / w.p(i);
  const double lam_inf = -src.abscissa(src.group_of(i));
  const RowVector base = src.omega().row(i);
  const RowVector phi_row = phi.row(i);

  RowXi out;
  out.xi.resize(n);
  std::vector<int> cols;
  for (int j = 0; j < n; ++j) {
    if (base(j) > 0.0) cols.push_back(j);
  }
  const double f_inf = lam_inf / (lam_inf - theta);
  if (src.states()[i].sticky()) {
    // Exponential sojourn: f_ij is constant, f(0) = f(inf).
    for (int j : cols) {
      XiCoefficient& c = out.xi[j];
      c.min = c.max = pref * f_inf;
      c.shape = FailureShape::kConstant;
      c.valid = std::isfinite(c.min) && c.min > 0.0;
    }
    return out;
  }

  const std::vector<double> xs = x_grid(w.tau(i), ctx.grid_points);
  std::vector<std::vector<double>> lam(n), f(n);
  std::vector<bool> ok(n, true);
  for (double x : xs) {
    RowInversion inv;
    try {
      inv = invert_row(src, i, theta, base, phi_row, x);
    } catch (const NumericalError&) {
      for (int j : cols) ok[j] = false;
      break;
    }
    for (int j : cols) {
      const double tail = inv.tail(j);
      if (!(tail > 1e-10 * base(j))) continue;  // resolution limit of the inversion
      lam[j].push_back(inv.density(j) / tail);
      f[j].push_back(inv.numerator(j) / (std::exp(theta * x) * tail));
    }
  }
  for (int j : cols) {
    XiCoefficient& c = out.xi[j];
    const double f0 = phi_row(j) / base(j);
    if (!ok[j] || lam[j].size() < 3) {
      c.valid = false;
      continue;
    }
    bool finite = std::isfinite(f0) && std::isfinite(f_inf);
    for (double v : f[j]) finite = finite && std::isfinite(v);
    if (!finite) {
      c.valid = false;
      continue;
    }
    c.shape = classify(lam[j], 1e-6);
    bool placed = false;
    if (c.shape != FailureShape::kMixed) {
      const bool ifr = c.shape != FailureShape::kDecreasing;
      const bool row1 = ifr == (theta > 0.0);
      const double mx = row1 ? f0 : f_inf;
      const double mn = row1 ? f_inf : f0;
      if (mn <= mx) {
        c.min = pref * mn;
        c.max = pref * mx;
        placed = true;
      } else {
        c.shape = FailureShape::kMixed;
      }
    }
    if (!placed) {
      double lo = std::min(f0, f_inf), hi = std::max(f0, f_inf);
      for (double v : f[j]) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      c.min = pref * lo;
      c.max = pref * hi;
    }
    c.valid = c.min > 0.0 && std::isfinite(c.max);
  }
  return out;
}

}  // namespace

double failure_rate(const CompensatingSource& src, int i, int j, double x) {
  const double total = src.omega()(i, j);
  if (!(total > 0.0)) throw std::invalid_argument("failure_rate: [Omega]_ij must be positive");
  if (!(x > 0.0)) throw std::invalid_argument("failure_rate: x must be positive");
  const int g = src.group_of(i);
  const auto& members = src.groups()[g].members;
  const int r = std::find(members.begin(), members.end(), i) - members.begin();
  auto entry = [&](double s) {
    auto rows = src.try_group_rows(g, s);
    if (!rows) throw TransformDivergence("failure_rate: transform diverges");
    return (*rows)(r, j);
  };
  const double density = invert_laplace(entry, x, kStehfestTerms);
  const double tail = invert_laplace([&](double s) { return (total - entry(s)) / s; }, x,
                                     kStehfestTerms);
  if (!(tail > 1e-12)) throw NumericalError("failure_rate: tail below 1e-12 (end of domain)");
  return std::max(0.0, density / tail);
}

FailureShape classify_failure_rate(const CompensatingSource& src, int i, int j, double x_max,
                                   int n, double tol) {
  std::vector<double> lam;
  lam.reserve(n);
  for (int k = 1; k <= n; ++k) lam.push_back(failure_rate(src, i, j, x_max * k / n));
  return classify(lam, tol);
}

XiCoefficient xi_coefficients(const CompensatingSource& src, const XiContext& ctx, int i, int j) {
  if (!(src.omega()(i, j) > 0.0)) throw std::invalid_argument("xi_coefficients: [Omega]_ij = 0");
  const Matrix phi = phi_matrix(src, ctx.eta, ctx.eb_c);
  return row_xi(src, ctx, phi, i).xi[j];
}

std::pair<double, double> Buffer2Bounds::tail_bounds(double x) const {
  const double e = std::exp(-eta * x);
  return {K_lower * e, K_upper * e};
}

Buffer2Bounds analyze_buffer2(const ModelParams& params, const Buffer2Options& opts) {
  const ValidationReport report = check_assumptions(params, AssumptionScope::kFull);
  if (!report.ok()) throw ModelError("invalid model: " + report.summary());
  const CompensatingSource src(params, opts.tol);

  Buffer2Bounds out;
  out.eta = solve_eta(src, opts.eta_tol);
  out.eb_c = eb_compensating(src, out.eta);
  out.eb_e = eb_exponential(params, out.eta);
  out.weights = weights_and_eigen(src, out.eta, out.eb_c);
  out.rates = src.rates();
  out.omega = src.omega();
  out.phi = phi_matrix(src, out.eta, out.eb_c);

  const int n = src.size();
  const SourceWeights& w = out.weights;
  out.H_c = 0.0;
  for (int i = 0; i < n; ++i) {
    const double theta = out.eta * (out.rates(i) - out.eb_c);
    if (std::abs(theta) < 1e-9) {
      out.H_c += w.h(i) * w.tau(i);
    } else {
      out.H_c += w.h(i) * (out.phi.row(i).sum() - 1.0) / theta;
    }
  }

  const double R2 = params.R2, a2 = params.alpha2, b2 = params.beta2, ee = out.eb_e;
  out.D.resize(params.N);
  for (int s = 1; s <= params.N; ++s) {
    out.D[s - 1] = std::pow((a2 + b2) / (a2 * b2), s) *
                   std::pow((a2 + b2) * (R2 - ee) / (ee * a2 * a2), params.N - s);
  }

  XiContext ctx{out.eta, out.eb_c, &out.weights, opts.grid_points};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.xi_min = Matrix::Constant(n, n, nan);
  out.xi_max = Matrix::Constant(n, n, nan);
  out.shapes.assign(n * n, FailureShape::kMixed);
  double max_term = -inf(), min_term = inf();
  for (int i = 0; i < n; ++i) {
    const RowXi row = row_xi(src, ctx, out.phi, i);
    for (int j = 0; j < n; ++j) {
      if (!(out.omega(i, j) > 0.0)) continue;
      const XiCoefficient& c = row.xi[j];
      if (!c.valid) {
        ++out.excluded_pairs;
        continue;
      }
      out.xi_min(i, j) = c.min;
      out.xi_max(i, j) = c.max;
      out.shapes[i * n + j] = c.shape;
      for (int s = 1; s <= params.N; ++s) {
        if (!(out.rates(i) + s * R2 > params.c)) continue;
        max_term = std::max(max_term, out.D[s - 1] * c.max);
        min_term = std::min(min_term, out.D[s - 1] * c.min);
      }
    }
  }
  if (!std::isfinite(max_term) || !std::isfinite(min_term)) {
    throw NumericalError("tail bounds: empty admissible (s, i, j) set");
  }
  const double numer = std::pow(R2 / (ee * a2), params.N) * out.H_c;
  out.K_lower = numer / max_term;
  out.K_upper = numer / min_term;
  return out;
}

}  // namespace fluidq
