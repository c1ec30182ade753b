#include <gtest/gtest.h>

#include <random>

#include "cross_checks.hpp"
#include "fluidq/model.hpp"
#include "fluidq/riccati.hpp"
#include "test_support.hpp"

using namespace fluidq;
using fluidq::testing::jacobi_minimal;
using fluidq::testing::max_abs;
using fluidq::testing::random_params;

TEST(Riccati, ScalarCaseHasClosedForm) {
  // N = 1 band 1 of the reference scenario: the minimal solution of the
  // upward equation is 1, the downward one beta (R1 - c1) / (alpha c1).
  const ModelParams p = make_params(1, 11, 1, 12.48, 11, 1, 12.48, 1.6, 1.0, 1.5);
  const BandBlocks b = band_blocks(p, partition_states(p), 1);
  EXPECT_NEAR(solve_riccati(b)(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(solve_riccati_hat(b)(0, 0), 1.0 * (12.48 - 1.6) / (11 * 1.6), 1e-12);
}

TEST(Riccati, RandomModelsSatisfyEquationsAndAreSubstochastic) {
  std::mt19937_64 rng(2024);
  for (int N : {1, 2, 3, 5}) {
    for (int trial = 0; trial < 12; ++trial) {
      const ModelParams p = random_params(rng, N);
      const PhasePartition part = partition_states(p);
      for (int band : {1, 2}) {
        const BandBlocks b = band_blocks(p, part, band);
        const Matrix psi = solve_riccati(b);
        EXPECT_LT(riccati_residual(riccati_problem(b), psi), 1e-10);
        EXPECT_GE(psi.minCoeff(), 0.0);
        EXPECT_LE(psi.rowwise().sum().maxCoeff(), 1.0 + 1e-10);
        if (band == 1) {
          const Matrix hat = solve_riccati_hat(b);
          EXPECT_LT(riccati_residual(riccati_hat_problem(b), hat), 1e-10);
          EXPECT_LE(hat.rowwise().sum().maxCoeff(), 1.0 + 1e-10);
        }
      }
    }
  }
}

TEST(Riccati, NewtonFindsTheMinimalSolution) {
  std::mt19937_64 rng(77);
  for (int N : {1, 2}) {
    for (int trial = 0; trial < 6; ++trial) {
      const ModelParams p = random_params(rng, N);
      const PhasePartition part = partition_states(p);
      for (int band : {1, 2}) {
        const BandBlocks b = band_blocks(p, part, band);
        const Matrix ref = jacobi_minimal(riccati_problem(b));
        EXPECT_LT(max_abs(solve_riccati(b) - ref), 1e-8) << "N=" << N << " band " << band;
        const Matrix ref_hat = jacobi_minimal(riccati_hat_problem(b));
        EXPECT_LT(max_abs(solve_riccati_hat(b) - ref_hat), 1e-8);
      }
    }
  }
}

TEST(Riccati, TransformAtPositiveArgumentIsSmaller) {
  const ModelParams p = make_params(2, 3, 1, 2.0, 1, 1, 4, 1.3, 1.0, 1.0);
  const BandBlocks b = band_blocks(p, partition_states(p), 2);
  Matrix prev = solve_riccati(b);
  for (double s : {0.5, 1.0, 2.0}) {
    const Matrix x = solve_riccati_lst(b, s);
    EXPECT_TRUE(((x - prev).array() <= 1e-14).all());
    prev = x;
  }
  const Matrix down = solve_riccati_lst(b, 0.0, 1e-12, Direction::kDown);
  EXPECT_LT(max_abs(down - solve_riccati_hat(b)), 1e-12);
}

TEST(Riccati, NoNonnegativeSolutionReported) {
  // A scalar equation 1 + x^2 = 0 has no real root.
  RiccatiProblem p{Matrix::Ones(1, 1), Matrix::Zero(1, 1), Matrix::Zero(1, 1), Matrix::Ones(1, 1)};
  EXPECT_FALSE(try_solve_minimal(p).has_value());
}
