#pragma once

#include <optional>

#include "fluidq/model.hpp"
#include "fluidq/riccati.hpp"

namespace fluidq {

// First-passage operators of one band at transform argument s (s = 0 gives
// the probabilities). Rows/columns follow BandBlocks::plus / ::minus.
struct PassageOperators {
  double s = 0.0;
  Matrix Psi, PsiHat;
  Matrix U, UHat;
  Matrix K, KHat;
};

// Passage matrices for a band of finite length b.
struct FinitePassage {
  Matrix Lambda_pp;     // start up at the bottom, reach the top first
  Matrix Psi_pm;        // start up at the bottom, return to the bottom first
  Matrix PsiHat_mp;     // start down at the top, return to the top first
  Matrix LambdaHat_mm;  // start down at the top, reach the bottom first
};

// Expected visit densities for a finite band; columns ordered (plus, minus).
struct FiniteVisits {
  Matrix from_bottom;  // N_+(0, w): |plus| rows
  Matrix from_top;     // N_-(b, w): |minus| rows
};

PassageOperators compute_operators(const BandBlocks& blocks, const Matrix& psi,
                                   const Matrix& psi_hat, double s = 0.0);

// Solves both Riccati equations and builds the operators; throws on failure.
PassageOperators passage_operators(const BandBlocks& blocks, double s = 0.0,
                                   double tol = 1e-12);

// As passage_operators but returns nullopt when either minimal solution
// does not exist at s (left of its abscissa of convergence).
std::optional<PassageOperators> try_passage_operators(const BandBlocks& blocks,
                                                      double s, double tol = 1e-12,
                                                      long max_functional = 20000);

// Block formula in terms of Psi, PsiHat, e^{U b}, e^{UHat b}.
FinitePassage finite_passage(const PassageOperators& ops, double b);

// Same matrices by a direct two-point boundary-value solve of the band's
// linear ODE; valid wherever the finite-band transform exists.
FinitePassage finite_passage_direct(const BandBlocks& blocks, double b, double s = 0.0);

// Transform of the finite-band passage at s. Uses the block formula when the
// infinite-band ingredients exist and the direct route otherwise; nullopt
// when s is beyond the abscissa of convergence.
std::optional<FinitePassage> try_finite_passage_lst(const BandBlocks& blocks, double b,
                                                    double s, double tol = 1e-12);

FinitePassage finite_passage_lst(const BandBlocks& blocks, double b, double s,
                                 double tol = 1e-12);

Matrix expected_visits_infinite(const Matrix& K, double w);

FiniteVisits expected_visits_finite(const PassageOperators& ops, double b, double w);

// Integral of the finite-band visit matrices over w in [0, x].
FiniteVisits integrated_visits_finite(const PassageOperators& ops, double b, double x);

// Jump chain P = I - Delta^{-1} T of a generator.
Matrix jump_matrix(const Matrix& T);

}  // namespace fluidq
