#include "fluidq/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fluidq/errors.hpp"

namespace fluidq {

namespace {

constexpr double kIntegralTol = 1e-9;

bool near_integer(double ratio) {
  return std::abs(ratio - std::round(ratio)) < kIntegralTol;
}

}  // namespace

ModelParams make_params(int N, double alpha1, double beta1, double R1,
                        double alpha2, double beta2, double R2, double c1,
                        double c2, double x_star, std::optional<double> V) {
  ModelParams p;
  p.N = N;
  p.alpha1 = alpha1;
  p.beta1 = beta1;
  p.R1 = R1;
  p.alpha2 = alpha2;
  p.beta2 = beta2;
  p.R2 = R2;
  p.c1 = c1;
  p.c2 = c2;
  p.c = c1 + c2;
  p.x_star = x_star;
  p.V = V;
  return p;
}

std::string ValidationReport::summary() const {
  if (violations.empty()) return "ok";
  std::ostringstream os;
  for (size_t k = 0; k < violations.size(); ++k) {
    if (k) os << "; ";
    os << violations[k];
  }
  return os.str();
}

Matrix build_generator(int N, double alpha, double beta) {
  if (N < 1 || !(alpha > 0.0) || !(beta > 0.0)) {
    throw ModelError("build_generator: need N >= 1, alpha > 0, beta > 0");
  }
  Matrix T = Matrix::Zero(N + 1, N + 1);
  for (int i = 0; i <= N; ++i) {
    if (i < N) T(i, i + 1) = (N - i) * beta;
    if (i > 0) T(i, i - 1) = i * alpha;
    T(i, i) = -(i * alpha + (N - i) * beta);
  }
  return T;
}

RowVector stationary_onoff(int N, double alpha, double beta) {
  if (N < 1 || !(alpha > 0.0) || !(beta > 0.0)) {
    throw ModelError("stationary_onoff: need N >= 1, alpha > 0, beta > 0");
  }
  // Binomial(N, beta / (alpha + beta)), built multiplicatively.
  const double on = beta / (alpha + beta);
  const double off = alpha / (alpha + beta);
  RowVector q(N + 1);
  for (int n = 0; n <= N; ++n) {
    q(n) = std::exp(std::lgamma(N + 1.0) - std::lgamma(n + 1.0) -
                    std::lgamma(N - n + 1.0) + n * std::log(on) +
                    (N - n) * std::log(off));
  }
  return q / q.sum();
}

double mean_rate(int N, double alpha, double beta, double R) {
  return N * R * beta / (alpha + beta);
}

ValidationReport check_assumptions(const ModelParams& p, AssumptionScope scope) {
  ValidationReport r;
  auto& v = r.violations;
  const bool full = scope == AssumptionScope::kFull;
  if (p.N < 1) v.push_back("N must be at least 1");
  if (!(p.alpha1 > 0.0) || !(p.beta1 > 0.0) || !(p.R1 > 0.0)) {
    v.push_back("Buffer-1 source rates must be positive");
  }
  if (full && (!(p.alpha2 > 0.0) || !(p.beta2 > 0.0) || !(p.R2 > 0.0))) {
    v.push_back("Buffer-2 source rates must be positive");
  }
  if (!(p.c1 > 0.0) || !(p.c2 > 0.0)) v.push_back("capacities must be positive");
  if (std::abs(p.c - (p.c1 + p.c2)) > 1e-12 * std::max(1.0, std::abs(p.c))) {
    v.push_back("c must equal c1 + c2");
  }
  if (!(p.x_star > 0.0)) v.push_back("x_star must be positive");
  if (p.V && !(*p.V > p.x_star)) v.push_back("V must exceed x_star");
  if (!v.empty()) return r;

  if (!(p.N * p.R1 > p.c)) v.push_back("no positive net rate above x*");
  if (near_integer(p.c1 / p.R1)) v.push_back("c1/R1 integral");
  if (near_integer(p.c / p.R1)) v.push_back("c/R1 integral");
  if (full && near_integer(p.c2 / p.R2)) v.push_back("c2/R2 integral");
  if (full && near_integer(p.c / p.R2)) v.push_back("c/R2 integral");

  const double load1 = mean_rate(p.N, p.alpha1, p.beta1, p.R1);
  if (full) {
    const double load2 = mean_rate(p.N, p.alpha2, p.beta2, p.R2);
    if (!(load1 + load2 < p.c)) v.push_back("unstable: total mean input >= c");
  } else if (!p.V && !(load1 < p.c)) {
    v.push_back("unstable: Buffer-1 mean input >= c");
  }
  return r;
}

bool contains(const PhaseSet& set, int phase) {
  return std::find(set.begin(), set.end(), phase) != set.end();
}

double band_rate(const ModelParams& p, int band, int phase) {
  return phase * p.R1 - (band == 1 ? p.c1 : p.c);
}

PhasePartition partition_states(const ModelParams& p) {
  PhasePartition s;
  for (int i = 0; i <= p.N; ++i) {
    const bool down1 = band_rate(p, 1, i) < 0.0;
    const bool down2 = band_rate(p, 2, i) < 0.0;
    (down1 ? s.S_minus_1 : s.S_plus_1).push_back(i);
    (down2 ? s.S_minus_2 : s.S_plus_2).push_back(i);
    if (down1) {
      s.S_s_o.push_back(i);
      s.S_d_star.push_back(i);
    } else {
      s.S_u_o.push_back(i);
      (down2 ? s.S_s_star : s.S_u_star).push_back(i);
    }
  }
  if (p.V) {
    s.S_s_V = s.S_plus_2;
    s.S_d_V = s.S_minus_2;
  }
  return s;
}

Matrix submatrix(const Matrix& m, const PhaseSet& rows, const PhaseSet& cols) {
  Matrix out(rows.size(), cols.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < cols.size(); ++c) out(r, c) = m(rows[r], cols[c]);
  }
  return out;
}

BandBlocks band_blocks(const ModelParams& p, const PhasePartition& part,
                       int band) {
  if (band != 1 && band != 2) throw ModelError("band must be 1 or 2");
  BandBlocks b;
  b.band = band;
  b.minus = band == 1 ? part.S_minus_1 : part.S_minus_2;
  b.plus = band == 1 ? part.S_plus_1 : part.S_plus_2;
  const Matrix T = build_generator(p.N, p.alpha1, p.beta1);
  b.T_mm = submatrix(T, b.minus, b.minus);
  b.T_mp = submatrix(T, b.minus, b.plus);
  b.T_pm = submatrix(T, b.plus, b.minus);
  b.T_pp = submatrix(T, b.plus, b.plus);
  b.C_full.resize(p.N + 1);
  for (int i = 0; i <= p.N; ++i) b.C_full(i) = std::abs(band_rate(p, band, i));
  b.C_minus.resize(b.minus.size());
  b.C_plus.resize(b.plus.size());
  for (size_t k = 0; k < b.minus.size(); ++k) b.C_minus(k) = b.C_full(b.minus[k]);
  for (size_t k = 0; k < b.plus.size(); ++k) b.C_plus(k) = b.C_full(b.plus[k]);
  return b;
}

}  // namespace fluidq
