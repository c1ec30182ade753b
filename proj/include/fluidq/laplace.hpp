#pragma once

#include <functional>
#include <vector>

namespace fluidq {

// Gaver-Stehfest inversion of a Laplace transform F(s) = int e^{-st} f(t) dt
// using only real s. n must be even; 14 suits double precision.
double invert_laplace(const std::function<double(double)>& transform, double t, int n = 14);

// Stehfest weights V_1..V_n.
std::vector<double> stehfest_weights(int n);

}  // namespace fluidq
