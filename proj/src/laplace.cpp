#include "fluidq/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fluidq {

std::vector<double> stehfest_weights(int n) {
  if (n <= 0 || n % 2) throw std::invalid_argument("stehfest_weights: n must be even");
  const int half = n / 2;
  auto fact = [](int k) { return std::tgamma(k + 1.0); };
  std::vector<double> v(n);
  for (int k = 1; k <= n; ++k) {
    double sum = 0.0;
    for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
      sum += std::pow(j, half) * fact(2 * j) /
             (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
    }
    v[k - 1] = ((k + half) % 2 ? -1.0 : 1.0) * sum;
  }
  return v;
}

double invert_laplace(const std::function<double(double)>& transform, double t, int n) {
  if (!(t > 0.0)) throw std::invalid_argument("invert_laplace: t must be positive");
  static thread_local int cached_n = 0;
  static thread_local std::vector<double> weights;
  if (cached_n != n) {
    weights = stehfest_weights(n);
    cached_n = n;
  }
  const double a = std::log(2.0) / t;
  double sum = 0.0;
  for (int k = 1; k <= n; ++k) sum += weights[k - 1] * transform(k * a);
  return a * sum;
}

}  // namespace fluidq
