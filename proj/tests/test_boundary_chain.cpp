#include <gtest/gtest.h>

#include <random>

#include "fluidq/boundary_chain.hpp"
#include "fluidq/linalg.hpp"
#include "test_support.hpp"

using namespace fluidq;
using fluidq::testing::max_abs;
using fluidq::testing::random_params;
using fluidq::testing::scenario_a;

namespace {

BoundaryChain chain_for(const ModelParams& p) {
  const PhasePartition part = partition_states(p);
  return assemble_omega(p, part, chain_blocks(p, part));
}

}  // namespace

TEST(BoundaryStates, SingleSourceInfiniteBuffer) {
  const BoundaryChain c = chain_for(scenario_a());
  std::vector<std::string> names;
  for (const auto& s : c.states) names.push_back(to_string(s));
  EXPECT_EQ(names, (std::vector<std::string>{"(0,u,1)", "(0,s,0)", "(*,u,1)", "(*,d,0)"}));
  EXPECT_EQ(c.index_of({Level::kTop, Motion::kSticky, 1}), -1);
}

TEST(BoundaryStates, FiniteBufferAddsTopStates) {
  const BoundaryChain c = chain_for(scenario_a(3.5));
  EXPECT_EQ(c.indices(Level::kTop, Motion::kSticky).size(), 1u);
  EXPECT_EQ(c.indices(Level::kTop, Motion::kDown).size(), 1u);
  EXPECT_EQ(c.sticky_indices().size(), 2u);
}

TEST(Omega, RowsAreStochasticForRandomModels) {
  std::mt19937_64 rng(99);
  for (int N : {1, 2, 3, 5}) {
    for (int trial = 0; trial < 4; ++trial) {
      for (bool finite : {false, true}) {
        const ModelParams p = random_params(rng, N, finite ? std::optional<double>(1.5) : std::nullopt);
        const BoundaryChain c = chain_for(p);
        EXPECT_GE(c.omega.minCoeff(), -1e-14);
        for (int i = 0; i < c.omega.rows(); ++i)
          EXPECT_NEAR(c.omega.row(i).sum(), 1.0, 1e-10) << to_string(c.states[i]);
        EXPECT_NO_THROW(require_stochastic(c));
      }
    }
  }
}

TEST(Omega, StickyRowsFollowTheJumpLaw) {
  const ModelParams p = scenario_a(3.5);
  const BoundaryChain c = chain_for(p);
  const int zero = c.index_of({Level::kZero, Motion::kSticky, 0});
  const int up = c.index_of({Level::kZero, Motion::kUp, 1});
  ASSERT_GE(zero, 0);
  EXPECT_DOUBLE_EQ(c.omega(zero, up), 1.0);
}

TEST(Omega, RequireStochasticNamesTheBadRow) {
  BoundaryChain c = chain_for(scenario_a());
  c.omega(0, 0) += 0.1;
  try {
    require_stochastic(c);
    FAIL() << "expected a throw";
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find(to_string(c.states[0])), std::string::npos);
  }
}

TEST(Censoring, TwoStepEqualsOneShotOntoStickySet) {
  std::mt19937_64 rng(4);
  for (int N : {2, 3, 5}) {
    for (bool finite : {false, true}) {
      const ModelParams p = random_params(rng, N, finite ? std::optional<double>(2.0) : std::nullopt);
      const BoundaryChain c = chain_for(p);
      const CensoredChain cens = censor(c, build_generator(p.N, p.alpha1, p.beta1));
      EXPECT_EQ(cens.sticky, c.sticky_indices());
      const Matrix direct = censor_onto(c.omega, cens.sticky);
      EXPECT_LT(max_abs(cens.omega_circle - direct), 1e-11);
      for (int i = 0; i < cens.theta.rows(); ++i) EXPECT_NEAR(cens.theta.row(i).sum(), 0.0, 1e-10);
      EXPECT_TRUE((cens.delta_s.array() > 0).all());
    }
  }
}
