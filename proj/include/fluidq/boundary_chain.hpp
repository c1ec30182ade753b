#pragma once

#include <string>
#include <vector>

#include "fluidq/model.hpp"
#include "fluidq/passage.hpp"

namespace fluidq {

enum class Level { kZero, kStar, kTop };
enum class Motion { kUp, kSticky, kDown };

struct BoundaryState {
  Level level = Level::kZero;
  Motion motion = Motion::kSticky;
  int phase = 0;

  bool sticky() const { return motion == Motion::kSticky; }
  bool operator==(const BoundaryState&) const = default;
};

std::string to_string(const BoundaryState& s);

// Boundary states ordered (0,u) (0,s) (*,u) (*,s) (*,d) and, for a finite
// buffer, (V,s) (V,d); phases ascending inside each group.
std::vector<BoundaryState> boundary_states(const PhasePartition& part, bool finite);

// Row blocks feeding the jump chain. For an infinite buffer only
// band2.Psi_pm is used (it holds Psi_2).
struct ChainBlocks {
  Matrix jump;  // row i: next-phase law of sticky phase i
  FinitePassage band1;
  FinitePassage band2;
};

struct BoundaryChain {
  std::vector<BoundaryState> states;
  Matrix omega;
  bool finite = false;

  int index_of(const BoundaryState& s) const;  // -1 if absent
  std::vector<int> indices(Level level, Motion motion) const;
  std::vector<int> sticky_indices() const;
};

BoundaryChain assemble_omega(const ModelParams& params, const PhasePartition& part,
                             const ChainBlocks& blocks);

// Rows of Omega that share one set of passage blocks: sticky rows use the
// jump law, band rows the passage matrices of band 1 or band 2.
enum class RowGroup { kSticky, kBand1, kBand2 };

RowGroup row_group(const BoundaryState& s);

// Overwrites the rows of one group in chain.omega from blocks; only the
// blocks that group needs must be populated.
void fill_omega_rows(const ModelParams& params, const PhasePartition& part,
                     const ChainBlocks& blocks, RowGroup group, BoundaryChain& chain);

// Throws NumericalError naming the first row whose sum is off by > tol.
void require_stochastic(const BoundaryChain& chain, double tol = 1e-8);

// Passage blocks at s = 0 from the model: finite band 1 of length x*, band 2
// infinite or of length V - x*.
ChainBlocks chain_blocks(const ModelParams& params, const PhasePartition& part,
                         double tol = 1e-12);

struct CensoredChain {
  Matrix omega_star;             // after removing E^(*)
  std::vector<int> star_states;  // chain indices kept in omega_star
  Matrix omega_circle;           // on the sticky set K
  std::vector<int> sticky;       // chain indices of K
  Vector delta_s;                // |T_ii| of the sticky phases
  Matrix theta;                  // generator on K
};

// Two-step censoring: first E^(*) = (*,u) (*,d) [(V,d)], then E^(0) = (0,u).
CensoredChain censor(const BoundaryChain& chain, const Matrix& generator);

}  // namespace fluidq
