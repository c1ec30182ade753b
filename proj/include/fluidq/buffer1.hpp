#pragma once

#include "fluidq/boundary_chain.hpp"
#include "fluidq/model.hpp"
#include "fluidq/passage.hpp"

namespace fluidq {

// x Theta = 0 with the first sticky weight fixed to 1.
RowVector solve_sticky_weights(const CensoredChain& cens);

// Level-crossing fluxes (unnormalized) and the density coefficients derived
// from them. Vectors are indexed by the phases of the named set.
struct DensityCoefficients {
  RowVector up_zero;  // upward entry at 0+, over S_plus_1
  RowVector f;        // downward flux at x*-, over S_d_star
  RowVector g;        // upward flux at x*+, over S_u_star
  RowVector h;        // downward flux at V-, over S_minus_2 (finite only)
  RowVector u, d;     // infinite buffer: g / C_plus^(2), f / C_minus^(1)
  RowVector gamma1, gamma2, gamma3;  // finite buffer: f / c-, g / c+, h / c-
};

// Chain-level inputs for the coefficient solve. weights is indexed by chain
// state (zero on non-sticky states).
struct FluxInputs {
  const ModelParams* params = nullptr;
  const PhasePartition* part = nullptr;
  const BoundaryChain* chain = nullptr;
  const ChainBlocks* blocks = nullptr;
  RowVector weights;
};

DensityCoefficients density_coeffs_infinite(const FluxInputs& in);
DensityCoefficients density_coeffs_finite(const FluxInputs& in);

// Max-norm residual of the flux balance equations for given coefficients.
double density_residual(const FluxInputs& in, const DensityCoefficients& coeffs);

class StationaryBuffer1 {
 public:
  static StationaryBuffer1 solve(const ModelParams& params, double tol = 1e-12);

  const ModelParams& params() const { return params_; }
  const PhasePartition& partition() const { return part_; }
  const BoundaryChain& chain() const { return chain_; }
  const ChainBlocks& blocks() const { return blocks_; }
  const CensoredChain& censored() const { return cens_; }
  const PassageOperators& band1_operators() const { return ops1_; }
  const PassageOperators& band2_operators() const { return ops2_; }
  const DensityCoefficients& coefficients() const { return coeffs_; }
  const Matrix& generator() const { return T_; }

  // Unnormalized sticky weights in censored-chain order (first entry 1).
  const RowVector& sticky_weights() const { return x_s_; }
  double kappa() const { return kappa_; }
  // Probability masses of the sticky states, censored-chain order.
  RowVector masses() const { return kappa_ * x_s_; }
  double mass_at(Level level) const;

  // pi(x) over phases 0..N for x strictly inside a band.
  RowVector density(double x) const;
  double cdf(double x) const;
  double tail(double x) const;
  // Sum of masses and of the density integrated over both bands.
  double total_probability() const;

 private:
  // Unnormalized density integrated over band 1 from 0 to x, per phase.
  RowVector band1_integral(double x) const;
  // Unnormalized density integrated over band 2 from x* to x* + w, per phase;
  // w = infinity allowed for an infinite buffer.
  RowVector band2_integral(double w) const;
  double weight_at(Level level) const;

  ModelParams params_;
  PhasePartition part_;
  Matrix T_;
  BandBlocks band1_, band2_;
  PassageOperators ops1_, ops2_;
  ChainBlocks blocks_;
  BoundaryChain chain_;
  CensoredChain cens_;
  RowVector x_s_;
  DensityCoefficients coeffs_;
  double kappa_ = 0.0;
};

}  // namespace fluidq
