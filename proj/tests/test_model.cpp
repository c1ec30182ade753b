#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fluidq/boundary_chain.hpp"
#include "fluidq/buffer2.hpp"
#include "fluidq/model.hpp"
#include "test_support.hpp"

using namespace fluidq;
using fluidq::testing::max_abs;
using fluidq::testing::scenario_a;

namespace {

bool mentions(const ValidationReport& r, const std::string& text) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const std::string& v) { return v.find(text) != std::string::npos; });
}

}  // namespace

TEST(Generator, BirthDeathRatesAndZeroRowSums) {
  const Matrix T = build_generator(3, 2.0, 0.5);
  ASSERT_EQ(T.rows(), 4);
  EXPECT_DOUBLE_EQ(T(0, 1), 3 * 0.5);
  EXPECT_DOUBLE_EQ(T(2, 1), 2 * 2.0);
  EXPECT_DOUBLE_EQ(T(2, 3), 1 * 0.5);
  EXPECT_DOUBLE_EQ(T(0, 2), 0.0);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(T.row(i).sum(), 0.0, 1e-14);
}

TEST(Generator, StationaryVectorIsBinomial) {
  const int N = 4;
  const double a = 3.0, b = 1.5;
  const RowVector pi = stationary_onoff(N, a, b);
  EXPECT_LT(max_abs(pi * build_generator(N, a, b)), 1e-13);
  const double on = b / (a + b);
  double binom = 1.0;
  for (int i = 0; i <= N; ++i) {
    if (i > 0) binom = binom * (N - i + 1) / i;
    EXPECT_NEAR(pi(i), binom * std::pow(on, i) * std::pow(1 - on, N - i), 1e-14);
  }
}

TEST(Assumptions, ReferenceScenarioIsAdmissible) {
  EXPECT_TRUE(check_assumptions(scenario_a()).ok());
  EXPECT_TRUE(check_assumptions(scenario_a(3.5)).ok());
}

TEST(Assumptions, IntegralCapacityRatioIsNamed) {
  ModelParams p = scenario_a();
  p.c1 = p.R1;
  p.c2 = 0.5;
  p.c = p.c1 + p.c2;
  const ValidationReport r = check_assumptions(p, AssumptionScope::kBuffer1);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(mentions(r, "c1/R1 integral"));
}

TEST(Assumptions, InstabilityAndBufferSizeAreReported) {
  ModelParams p = scenario_a();
  p.beta1 = 5.0;  // mean input 12.48 * 5/16 > 2.6
  EXPECT_TRUE(mentions(check_assumptions(p, AssumptionScope::kBuffer1), "unstable"));
  ModelParams q = scenario_a(1.0);
  EXPECT_TRUE(mentions(check_assumptions(q, AssumptionScope::kBuffer1), "V must exceed x_star"));
}

TEST(Assumptions, Buffer1ScopeIgnoresBuffer2Inputs) {
  ModelParams p = scenario_a();
  p.alpha2 = p.beta2 = p.R2 = 0.0;
  EXPECT_TRUE(check_assumptions(p, AssumptionScope::kBuffer1).ok());
  EXPECT_FALSE(check_assumptions(p, AssumptionScope::kFull).ok());
}

TEST(Partition, SetsFollowRateSigns) {
  // N = 5, R1 = 1: phases 0,1 below c1 = 1.5; 2,3 between c1 and c = 3.5;
  // 4,5 above c.
  const ModelParams p = make_params(5, 1.0, 1.0, 1.0, 1.0, 0.1, 4.0, 1.5, 2.0, 1.0);
  const PhasePartition s = partition_states(p);
  EXPECT_EQ(s.S_minus_1, (PhaseSet{0, 1}));
  EXPECT_EQ(s.S_plus_1, (PhaseSet{2, 3, 4, 5}));
  EXPECT_EQ(s.S_s_o, s.S_minus_1);
  EXPECT_EQ(s.S_u_o, s.S_plus_1);
  EXPECT_EQ(s.S_d_star, s.S_minus_1);
  EXPECT_EQ(s.S_s_star, (PhaseSet{2, 3}));
  EXPECT_EQ(s.S_u_star, (PhaseSet{4, 5}));
  EXPECT_EQ(s.S_minus_2, (PhaseSet{0, 1, 2, 3}));
  EXPECT_EQ(s.S_plus_2, (PhaseSet{4, 5}));
  EXPECT_TRUE(s.S_s_V.empty());
}

TEST(Partition, BandBlocksCarryAbsoluteRates) {
  const ModelParams p = scenario_a();
  const BandBlocks b1 = band_blocks(p, partition_states(p), 1);
  ASSERT_EQ(b1.C_minus.size(), 1);
  ASSERT_EQ(b1.C_plus.size(), 1);
  EXPECT_DOUBLE_EQ(b1.C_minus(0), 1.6);
  EXPECT_NEAR(b1.C_plus(0), 12.48 - 1.6, 1e-14);
  EXPECT_DOUBLE_EQ(band_rate(p, 2, 1), 12.48 - 2.6);
}

TEST(CompensatingRates, SingleSourceCaseTable) {
  const ModelParams p = scenario_a();
  const std::vector<BoundaryState> states = boundary_states(partition_states(p), false);
  const Vector a = compensating_rates(states, p);
  for (size_t k = 0; k < states.size(); ++k) {
    const std::string name = to_string(states[k]);
    if (name == "(0,s,0)") EXPECT_DOUBLE_EQ(a(k), 0.0);
    if (name == "(0,u,1)") EXPECT_DOUBLE_EQ(a(k), p.c1);
    if (name == "(*,d,0)") EXPECT_DOUBLE_EQ(a(k), p.c1);
    if (name == "(*,u,1)") EXPECT_DOUBLE_EQ(a(k), p.c);
  }
}

TEST(CompensatingRates, StickyStarStateUsesPhaseRateAndAllWithinCapacity) {
  const ModelParams p = make_params(5, 1.0, 1.0, 1.0, 1.0, 0.1, 4.0, 1.5, 2.0, 1.0, 3.0);
  const std::vector<BoundaryState> states = boundary_states(partition_states(p), true);
  const Vector a = compensating_rates(states, p);
  for (size_t k = 0; k < states.size(); ++k) {
    if (states[k].level == Level::kStar && states[k].sticky()) {
      EXPECT_DOUBLE_EQ(a(k), states[k].phase * p.R1);
    }
    EXPECT_GE(a(k), 0.0);
    EXPECT_LE(a(k), p.c);
  }
}
