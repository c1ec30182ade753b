#include <gtest/gtest.h>

#include <random>

#include "fluidq/errors.hpp"
#include "fluidq/linalg.hpp"
#include "test_support.hpp"

using namespace fluidq;
using fluidq::testing::max_abs;

namespace {

// Plain Taylor series with enough terms for ||M|| <= 2.
Matrix taylor_exp(const Matrix& m) {
  Matrix term = Matrix::Identity(m.rows(), m.cols());
  Matrix sum = term;
  for (int k = 1; k < 60; ++k) {
    term = term * m / k;
    sum += term;
  }
  return sum;
}

Matrix random_matrix(std::mt19937_64& rng, int n, double scale) {
  std::uniform_real_distribution<double> U(-scale, scale);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = U(rng);
  return m;
}

}  // namespace

TEST(MatrixExponential, MatchesTaylorSeries) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = random_matrix(rng, 1 + trial % 5, 0.4);
    const Matrix ref = taylor_exp(m);
    EXPECT_LT(max_abs(matrix_exponential(m) - ref), 1e-12 * max_abs(ref));
  }
}

TEST(MatrixExponential, EmptyAndDiagonal) {
  EXPECT_EQ(matrix_exponential(Matrix(0, 0)).size(), 0);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = -1.0;
  d(1, 1) = 2.0;
  const Matrix e = matrix_exponential(d);
  EXPECT_NEAR(e(0, 0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(e(1, 1), std::exp(2.0), 1e-14);
}

TEST(IntegratedExponential, MatchesSimpsonAndHandlesSingular) {
  std::mt19937_64 rng(5);
  const Matrix k = random_matrix(rng, 3, 1.0);
  const double x = 1.3;
  const int n = 2000;
  Matrix simpson = Matrix::Zero(3, 3);
  for (int i = 0; i <= n; ++i) {
    const double w = i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0);
    simpson += w * matrix_exponential(k * (x * i / n));
  }
  simpson *= x / (3.0 * n);
  EXPECT_LT(max_abs(integrated_exponential(k, x) - simpson), 1e-10);

  const Matrix zero = Matrix::Zero(2, 2);
  EXPECT_LT(max_abs(integrated_exponential(zero, 2.0) - 2.0 * Matrix::Identity(2, 2)), 1e-14);
}

TEST(Sylvester, ResidualVanishes) {
  std::mt19937_64 rng(3);
  Matrix a = random_matrix(rng, 3, 1.0) - 4.0 * Matrix::Identity(3, 3);
  Matrix b = random_matrix(rng, 2, 1.0) - 4.0 * Matrix::Identity(2, 2);
  Matrix c = Matrix::Random(3, 2);
  const Matrix x = solve_sylvester(a, b, c);
  EXPECT_LT(max_abs(a * x + x * b - c), 1e-13);
}

TEST(Sylvester, SingularOperatorThrows) {
  const Matrix a = Matrix::Identity(2, 2);
  const Matrix b = -Matrix::Identity(2, 2);
  EXPECT_THROW(solve_sylvester(a, b, Matrix::Ones(2, 2)), NumericalError);
}

TEST(NullVector, StationaryVectorOfStochasticMatrix) {
  Matrix p(3, 3);
  p << 0.5, 0.5, 0.0, 0.2, 0.3, 0.5, 0.1, 0.0, 0.9;
  const RowVector pi = stationary_vector(p);
  EXPECT_NEAR(pi.sum(), 1.0, 1e-15);
  EXPECT_LT(max_abs(pi * p - pi), 1e-14);
  EXPECT_TRUE((pi.array() > 0).all());
}

TEST(NullVector, OneByOneNoiseIsANullSpace) {
  Matrix g(1, 1);
  g(0, 0) = 3e-17;
  const RowVector x = left_null_vector(g, 1.0);
  EXPECT_DOUBLE_EQ(x(0), 1.0);
  g(0, 0) = 0.5;
  EXPECT_THROW(left_null_vector(g, 1.0), NumericalError);
}

TEST(NullVector, TwoDimensionalNullSpaceThrows) {
  EXPECT_THROW(left_null_vector(Matrix::Zero(3, 3), 1.0), NumericalError);
}

TEST(Censoring, StochasticComplementMatchesSeriesOfExcursions) {
  Matrix p(4, 4);
  p << 0.1, 0.4, 0.3, 0.2, 0.3, 0.1, 0.4, 0.2, 0.25, 0.25, 0.25, 0.25, 0.5, 0.0, 0.2, 0.3;
  const std::vector<int> keep = {0, 2};
  const std::vector<int> drop = {1, 3};
  // P_kk + P_kd (sum_n P_dd^n) P_dk, truncated series.
  const Matrix pkk = select(p, keep, keep), pkd = select(p, keep, drop);
  const Matrix pdd = select(p, drop, drop), pdk = select(p, drop, keep);
  Matrix series = Matrix::Identity(2, 2), power = Matrix::Identity(2, 2);
  for (int n = 0; n < 400; ++n) {
    power = power * pdd;
    series += power;
  }
  const Matrix expected = pkk + pkd * series * pdk;
  const Matrix c = censor_onto(p, keep);
  EXPECT_LT(max_abs(c - expected), 1e-13);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(c.row(i).sum(), 1.0, 1e-14);
}

TEST(Perron, LeftVectorOfPositiveMatrix) {
  Matrix m(2, 2);
  m << 0.5, 0.5, 0.25, 0.75;
  const PerronPair pp = perron_left(m);
  EXPECT_NEAR(pp.value, 1.0, 1e-14);
  EXPECT_NEAR(pp.left.sum(), 1.0, 1e-15);
  EXPECT_LT(max_abs(pp.left * m - pp.left), 1e-14);
  EXPECT_NEAR(spectral_radius(m), 1.0, 1e-14);
}
