#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fluidq/buffer1.hpp"
#include "fluidq/errors.hpp"
#include "cross_checks.hpp"
#include "test_support.hpp"

using namespace fluidq;
using namespace fluidq::testing;

namespace {

struct PublishedCell {
  double c1;
  std::optional<double> V;
  double at_x_star, at_3;
};

// Published four-decimal values of lim P(X > x*) and lim P(X > 3).
const std::vector<PublishedCell> kPublished = {
    {1.6, 3.5, 0.1411, 0.0237},  {1.6, 6.0, 0.1660, 0.0519},  {1.6, 20.0, 0.1706, 0.0572},
    {1.19, 3.5, 0.1615, 0.0271}, {1.19, 6.0, 0.1891, 0.0592}, {1.19, 20.0, 0.1942, 0.0651},
    {0.2, 3.5, 0.3009, 0.0505},  {0.2, 6.0, 0.3426, 0.1072},  {0.2, 20.0, 0.3501, 0.1173},
    {1.6, {}, 0.1706, 0.0572},   {1.19, {}, 0.1942, 0.0651},  {0.2, {}, 0.3501, 0.1173},
};

}  // namespace

TEST(Buffer1, PublishedTailProbabilities) {
  for (const PublishedCell& cell : kPublished) {
    const StationaryBuffer1 s = StationaryBuffer1::solve(scenario(cell.c1, cell.V));
    EXPECT_NEAR(s.tail(1.5), cell.at_x_star, 5e-4) << cell.c1 << " V=" << cell.V.value_or(-1);
    EXPECT_NEAR(s.tail(3.0), cell.at_3, 5e-4) << cell.c1 << " V=" << cell.V.value_or(-1);
  }
}

TEST(Buffer1, LargeFiniteBufferApproachesInfinite) {
  for (double c1 : {1.6, 1.19, 0.2}) {
    const StationaryBuffer1 inf = StationaryBuffer1::solve(scenario(c1));
    const StationaryBuffer1 v20 = StationaryBuffer1::solve(scenario(c1, 20.0));
    const StationaryBuffer1 v1000 = StationaryBuffer1::solve(scenario(c1, 1000.0));
    EXPECT_NEAR(v20.tail(1.5), inf.tail(1.5), 1e-4);
    EXPECT_NEAR(v20.tail(3.0), inf.tail(3.0), 1e-4);
    double sup = 0.0;
    for (int k = 0; k <= 400; ++k) {
      const double x = 0.05 * k;
      sup = std::max(sup, std::abs(v1000.tail(x) - inf.tail(x)));
    }
    EXPECT_LT(sup, 1e-6);
  }
}

TEST(Buffer1, QuadratureConfirmsNormalization) {
  for (std::optional<double> V : {std::optional<double>(), std::optional<double>(3.5),
                                  std::optional<double>(6.0)}) {
    const StationaryBuffer1 s = StationaryBuffer1::solve(scenario_a(V));
    EXPECT_NEAR(s.total_probability(), 1.0, 1e-10);
    EXPECT_NEAR(quadrature_total(s), 1.0, 1e-8);
  }
}

TEST(Buffer1, RandomModelsNormalizeAndHaveNonnegativeDensity) {
  std::mt19937_64 rng(17);
  for (int N : {1, 2, 3, 5}) {
    for (int trial = 0; trial < 3; ++trial) {
      for (bool finite : {false, true}) {
        const ModelParams p = random_params(rng, N, finite ? std::optional<double>(2.5) : std::nullopt);
        const StationaryBuffer1 s = StationaryBuffer1::solve(p);
        EXPECT_NEAR(s.total_probability(), 1.0, 1e-8);
        EXPECT_NEAR(quadrature_total(s), 1.0, 1e-8) << "N=" << N;
        EXPECT_GT(s.kappa(), 0.0);
        EXPECT_TRUE((s.masses().array() >= 0).all());
        const double top = p.V ? *p.V : p.x_star + 10.0;
        for (int k = 1; k < 1000; ++k) {
          const double x = top * k / 1000.0;
          if (std::abs(x - p.x_star) < 1e-9) continue;
          EXPECT_GE(s.density(x).minCoeff(), -1e-12) << "x=" << x;
        }
      }
    }
  }
}

TEST(Buffer1, TailJumpsByTheAtomAtThreshold) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 6; ++trial) {
    const ModelParams p = random_params(rng, 3, trial % 2 ? std::optional<double>(2.0) : std::nullopt);
    const StationaryBuffer1 s = StationaryBuffer1::solve(p);
    const double eps = 1e-9;
    EXPECT_NEAR(s.tail(p.x_star - eps) - s.tail(p.x_star), s.mass_at(Level::kStar), 1e-7);
    EXPECT_NEAR(1.0 - s.tail(0.0), s.mass_at(Level::kZero), 1e-12);
    if (p.V) EXPECT_NEAR(s.tail(*p.V - eps), s.mass_at(Level::kTop), 1e-7);
    double prev = 1.0;
    for (int k = 0; k <= 200; ++k) {
      const double t = s.tail(0.05 * k);
      EXPECT_LE(t, prev + 1e-14);
      prev = t;
    }
  }
}

TEST(Buffer1, InfiniteTailDecaysAtDominantRateOfK) {
  std::mt19937_64 rng(8);
  for (int N : {1, 2, 3}) {
    const StationaryBuffer1 s = StationaryBuffer1::solve(random_params(rng, N));
    const Eigen::VectorXcd ev = s.band2_operators().K.eigenvalues();
    double lead = -std::numeric_limits<double>::infinity();
    for (const auto& z : ev) lead = std::max(lead, z.real());
    ASSERT_LT(lead, 0.0);
    const double x1 = s.params().x_star + 30.0 / -lead, x2 = x1 + 5.0 / -lead;
    const double slope = std::log(s.tail(x2) / s.tail(x1)) / (x2 - x1);
    EXPECT_NEAR(slope, lead, 1e-4 * std::abs(lead)) << "N=" << N;
  }
}

TEST(Buffer1, DensityRejectsBoundaryLevels) {
  const StationaryBuffer1 s = StationaryBuffer1::solve(scenario_a(3.5));
  EXPECT_THROW(s.density(1.5), std::invalid_argument);
  EXPECT_THROW(s.density(0.0), std::invalid_argument);
  EXPECT_THROW(s.density(3.5), std::invalid_argument);
}

TEST(Buffer1, InvalidModelIsRejected) {
  ModelParams p = scenario_a();
  p.c1 = p.R1;
  p.c = p.c1 + p.c2;
  EXPECT_THROW(StationaryBuffer1::solve(p), ModelError);
}
