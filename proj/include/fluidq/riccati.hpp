#pragma once

#include <optional>

#include "fluidq/model.hpp"

namespace fluidq {

// Nonsymmetric algebraic Riccati equation A + B X + X C + X D X = 0 whose
// minimal nonnegative solution is wanted.
struct RiccatiProblem {
  Matrix A, B, C, D;
};

struct RiccatiOptions {
  double tol = 1e-12;
  int max_newton = 200;
  long max_functional = 1000000;
};

enum class RiccatiMethod { kNewton, kFunctional };

struct RiccatiSolution {
  Matrix X;
  double residual = 0.0;
  int iterations = 0;
  RiccatiMethod method = RiccatiMethod::kNewton;
};

double riccati_residual(const RiccatiProblem& problem, const Matrix& x);

// Newton from zero, falling back to a Sylvester fixed-point iteration when
// Newton stalls. Returns nullopt when the iterates leave the nonnegative cone
// or blow up, which means no minimal nonnegative solution exists.
std::optional<RiccatiSolution> try_solve_minimal(const RiccatiProblem& problem,
                                                 const RiccatiOptions& opts = {});

// As try_solve_minimal but throws NumericalError with the final residual.
RiccatiSolution solve_minimal(const RiccatiProblem& problem,
                              const RiccatiOptions& opts = {});

// Problems for the first-passage matrices of one band, with both diagonal
// blocks of T shifted by -s I for the transform at s.
RiccatiProblem riccati_problem(const BandBlocks& blocks, double s = 0.0);
RiccatiProblem riccati_hat_problem(const BandBlocks& blocks, double s = 0.0);

Matrix solve_riccati(const BandBlocks& blocks, double tol = 1e-12);
Matrix solve_riccati_hat(const BandBlocks& blocks, double tol = 1e-12);

enum class Direction { kUp, kDown };

// Transform of the passage time: kUp gives Psi(s), kDown gives PsiHat(s).
Matrix solve_riccati_lst(const BandBlocks& blocks, double s, double tol = 1e-12,
                         Direction dir = Direction::kUp);

}  // namespace fluidq
