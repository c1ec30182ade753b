#pragma once

#include <span>
#include <vector>

#include "fluidq/model.hpp"

namespace fluidq {

// e^M by scaling and squaring with a Pade approximant. Accepts 0x0 input.
Matrix matrix_exponential(const Matrix& m);

// Integral of e^{K w} over w in [0, x], via the exponential of the augmented
// matrix [[K, I], [0, 0]] x. Works for singular K.
Matrix integrated_exponential(const Matrix& k, double x);

// Solves A X + X B = C through the Kronecker form. Throws NumericalError when
// the operator is singular.
Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c);

// Inverse through a pivoted LU, throwing when the matrix is singular.
Matrix checked_inverse(const Matrix& m, const char* what);

double spectral_radius(const Matrix& m);

struct PerronPair {
  double value = 0.0;
  RowVector left;  // nonnegative, sums to 1
};

// Largest real eigenvalue of a nonnegative matrix and its left eigenvector.
PerronPair perron_left(const Matrix& m);

// Stationary vector of a stochastic matrix: pi P = pi, pi 1 = 1.
RowVector stationary_vector(const Matrix& stochastic);

// x G = 0 with x(0) = 1, by replacing the first equation with the
// normalization. Throws when the null space is not one-dimensional; scale is
// the magnitude against which the residual x G is judged (default: max |G|).
RowVector left_null_vector(const Matrix& g, double scale = 0.0);

// Stochastic complement of a transition matrix onto the index set keep.
Matrix censor_onto(const Matrix& omega, std::span<const int> keep);

Matrix select(const Matrix& m, std::span<const int> rows, std::span<const int> cols);

}  // namespace fluidq
