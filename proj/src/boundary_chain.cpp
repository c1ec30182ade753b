#include "fluidq/boundary_chain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fluidq/errors.hpp"
#include "fluidq/linalg.hpp"

namespace fluidq {

namespace {

int position(const PhaseSet& set, int phase) {
  auto it = std::find(set.begin(), set.end(), phase);
  return it == set.end() ? -1 : static_cast<int>(it - set.begin());
}

}  // namespace

std::string to_string(const BoundaryState& s) {
  std::ostringstream os;
  const char* level = s.level == Level::kZero ? "0" : s.level == Level::kStar ? "*" : "V";
  const char* motion = s.motion == Motion::kUp ? "u" : s.motion == Motion::kSticky ? "s" : "d";
  os << "(" << level << "," << motion << "," << s.phase << ")";
  return os.str();
}

std::vector<BoundaryState> boundary_states(const PhasePartition& part, bool finite) {
  std::vector<BoundaryState> out;
  auto add = [&](Level l, Motion m, const PhaseSet& set) {
    for (int i : set) out.push_back({l, m, i});
  };
  add(Level::kZero, Motion::kUp, part.S_u_o);
  add(Level::kZero, Motion::kSticky, part.S_s_o);
  add(Level::kStar, Motion::kUp, part.S_u_star);
  add(Level::kStar, Motion::kSticky, part.S_s_star);
  add(Level::kStar, Motion::kDown, part.S_d_star);
  if (finite) {
    add(Level::kTop, Motion::kSticky, part.S_plus_2);
    add(Level::kTop, Motion::kDown, part.S_minus_2);
  }
  return out;
}

int BoundaryChain::index_of(const BoundaryState& s) const {
  auto it = std::find(states.begin(), states.end(), s);
  return it == states.end() ? -1 : static_cast<int>(it - states.begin());
}

std::vector<int> BoundaryChain::indices(Level level, Motion motion) const {
  std::vector<int> out;
  for (size_t k = 0; k < states.size(); ++k) {
    if (states[k].level == level && states[k].motion == motion) out.push_back(k);
  }
  return out;
}

std::vector<int> BoundaryChain::sticky_indices() const {
  std::vector<int> out;
  for (size_t k = 0; k < states.size(); ++k) {
    if (states[k].sticky()) out.push_back(k);
  }
  return out;
}

RowGroup row_group(const BoundaryState& s) {
  if (s.sticky()) return RowGroup::kSticky;
  if (s.level == Level::kZero) return RowGroup::kBand1;
  if (s.level == Level::kStar && s.motion == Motion::kDown) return RowGroup::kBand1;
  return RowGroup::kBand2;
}

void fill_omega_rows(const ModelParams& params, const PhasePartition& part,
                     const ChainBlocks& blocks, RowGroup group, BoundaryChain& chain) {
  // Where a phase lands when the level process arrives at a boundary.
  auto at_zero = [&](int j) {
    return BoundaryState{Level::kZero, contains(part.S_s_o, j) ? Motion::kSticky : Motion::kUp, j};
  };
  auto at_star = [&](int j) {
    Motion m = contains(part.S_s_star, j)   ? Motion::kSticky
               : contains(part.S_u_star, j) ? Motion::kUp
                                            : Motion::kDown;
    return BoundaryState{Level::kStar, m, j};
  };
  auto at_top = [&](int j) {
    return BoundaryState{Level::kTop, contains(part.S_plus_2, j) ? Motion::kSticky : Motion::kDown, j};
  };
  auto add = [&](int row, const BoundaryState& target, double value) {
    const int col = chain.index_of(target);
    if (col < 0) throw NumericalError("assemble_omega: unknown target " + to_string(target));
    chain.omega(row, col) += value;
  };

  const PhaseSet& m1 = part.S_minus_1;
  const PhaseSet& p1 = part.S_plus_1;
  const PhaseSet& m2 = part.S_minus_2;
  const PhaseSet& p2 = part.S_plus_2;
  const int n = chain.states.size();
  for (int k = 0; k < n; ++k) {
    const BoundaryState& st = chain.states[k];
    if (row_group(st) != group) continue;
    chain.omega.row(k).setZero();
    const int i = st.phase;
    if (st.sticky()) {
      for (int j = 0; j <= params.N; ++j) {
        const double pij = blocks.jump(i, j);
        if (pij == 0.0) continue;
        const BoundaryState target = st.level == Level::kZero   ? at_zero(j)
                                     : st.level == Level::kStar ? at_star(j)
                                                                : at_top(j);
        add(k, target, pij);
      }
    } else if (st.level == Level::kZero) {
      const int r = position(p1, i);
      for (size_t c = 0; c < m1.size(); ++c) add(k, at_zero(m1[c]), blocks.band1.Psi_pm(r, c));
      for (size_t c = 0; c < p1.size(); ++c) add(k, at_star(p1[c]), blocks.band1.Lambda_pp(r, c));
    } else if (st.level == Level::kStar && st.motion == Motion::kDown) {
      const int r = position(m1, i);
      for (size_t c = 0; c < m1.size(); ++c) add(k, at_zero(m1[c]), blocks.band1.LambdaHat_mm(r, c));
      for (size_t c = 0; c < p1.size(); ++c) add(k, at_star(p1[c]), blocks.band1.PsiHat_mp(r, c));
    } else if (st.level == Level::kStar) {
      const int r = position(p2, i);
      for (size_t c = 0; c < m2.size(); ++c) add(k, at_star(m2[c]), blocks.band2.Psi_pm(r, c));
      if (chain.finite) {
        for (size_t c = 0; c < p2.size(); ++c) add(k, at_top(p2[c]), blocks.band2.Lambda_pp(r, c));
      }
    } else {
      const int r = position(m2, i);
      for (size_t c = 0; c < m2.size(); ++c) add(k, at_star(m2[c]), blocks.band2.LambdaHat_mm(r, c));
      for (size_t c = 0; c < p2.size(); ++c) add(k, at_top(p2[c]), blocks.band2.PsiHat_mp(r, c));
    }
  }
}

BoundaryChain assemble_omega(const ModelParams& params, const PhasePartition& part,
                             const ChainBlocks& blocks) {
  BoundaryChain chain;
  chain.finite = params.finite();
  chain.states = boundary_states(part, chain.finite);
  const int n = chain.states.size();
  chain.omega = Matrix::Zero(n, n);
  for (RowGroup g : {RowGroup::kSticky, RowGroup::kBand1, RowGroup::kBand2}) {
    fill_omega_rows(params, part, blocks, g, chain);
  }
  return chain;
}

void require_stochastic(const BoundaryChain& chain, double tol) {
  for (Eigen::Index k = 0; k < chain.omega.rows(); ++k) {
    const double sum = chain.omega.row(k).sum();
    if (std::abs(sum - 1.0) > tol) {
      std::ostringstream os;
      os << "Omega row " << to_string(chain.states[k]) << " sums to " << sum;
      throw NumericalError(os.str());
    }
  }
}

ChainBlocks chain_blocks(const ModelParams& params, const PhasePartition& part, double tol) {
  ChainBlocks b;
  b.jump = jump_matrix(build_generator(params.N, params.alpha1, params.beta1));
  const BandBlocks band1 = band_blocks(params, part, 1);
  const BandBlocks band2 = band_blocks(params, part, 2);
  b.band1 = finite_passage(passage_operators(band1, 0.0, tol), params.x_star);
  if (params.V) {
    b.band2 = finite_passage(passage_operators(band2, 0.0, tol), *params.V - params.x_star);
  } else {
    b.band2.Psi_pm = solve_riccati(band2, tol);
  }
  return b;
}

CensoredChain censor(const BoundaryChain& chain, const Matrix& generator) {
  CensoredChain out;
  const int n = chain.states.size();
  for (int k = 0; k < n; ++k) {
    const BoundaryState& s = chain.states[k];
    const bool transient_star = (s.level == Level::kStar && !s.sticky()) ||
                                (s.level == Level::kTop && s.motion == Motion::kDown);
    if (!transient_star) out.star_states.push_back(k);
  }
  out.omega_star = censor_onto(chain.omega, out.star_states);

  std::vector<int> keep_local;
  for (size_t k = 0; k < out.star_states.size(); ++k) {
    if (chain.states[out.star_states[k]].sticky()) {
      keep_local.push_back(k);
      out.sticky.push_back(out.star_states[k]);
    }
  }
  out.omega_circle = censor_onto(out.omega_star, keep_local);

  const int m = out.sticky.size();
  out.delta_s.resize(m);
  for (int k = 0; k < m; ++k) {
    const int phase = chain.states[out.sticky[k]].phase;
    out.delta_s(k) = std::abs(generator(phase, phase));
  }
  out.theta = out.delta_s.asDiagonal() * (out.omega_circle - Matrix::Identity(m, m));
  return out;
}

}  // namespace fluidq
