#pragma once

#include <cstdint>
#include <vector>

#include "fluidq/boundary_chain.hpp"
#include "fluidq/model.hpp"

namespace fluidq {

struct SimConfig {
  double horizon = 1e6;
  double warmup = -1.0;  // negative: 10% of the horizon
  std::uint64_t seed = 1;
  int replications = 1;
  std::vector<double> x_grid;
  std::vector<double> y_grid;
  int batches = 50;
  int threads = 0;  // 0: hardware concurrency

  double effective_warmup() const { return warmup < 0.0 ? 0.1 * horizon : warmup; }
};

enum class Regime { kAt0, kBand1, kAtStar, kBand2, kAtTop };

struct SimState {
  double t = 0.0;
  double X = 0.0;
  double Y = 0.0;
  int i1 = 0;
  int i2 = 0;
  Regime regime = Regime::kAt0;
};

// Net rate of Buffer 1 in the current regime (0 on sticky regimes).
double x_drift(const ModelParams& params, const SimState& s);

// Capacity left for Buffer 2: c - i1 R1 while X is pinned at 0 or x*, c2
// inside band 1 and 0 while X >= x* otherwise.
double y_output(const ModelParams& params, const SimState& s);

// Net rate of Buffer 2, floored at 0 when Y = 0.
double y_drift(const ModelParams& params, const SimState& s);

// Time until X reaches 0, x* or V, or Y reaches 0, under the current
// drifts; +infinity if none.
double boundary_hit_time(const ModelParams& params, const SimState& s);

// Regime for X sitting exactly on 0, x* or V with phase s.i1: pinned if the
// phase is sticky there, else the band it moves into.
Regime sticky_resolution(const ModelParams& params, const SimState& s);

struct LevelEstimate {
  double level = 0.0;
  double tail = 0.0;
  double std_error = 0.0;
};

struct SimEstimate {
  std::vector<LevelEstimate> x_tail;
  std::vector<LevelEstimate> y_tail;
  int replications = 0;
  bool diverged = false;
  std::vector<BoundaryState> states;  // boundary states of the compensating source
  RowVector occupancy;                // fraction of post-warmup time per state
  Matrix transitions;                 // counts of successive boundary states
};

SimEstimate simulate(const ModelParams& params, const SimConfig& config);

}  // namespace fluidq
