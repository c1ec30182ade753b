#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "fluidq/boundary_chain.hpp"
#include "fluidq/model.hpp"

namespace fluidq {

// Input rate of the compensating source per boundary state: i R1 on sticky
// states at 0 and x*, c1 on (0,u) and (*,d), c on (*,u) and on every state
// at V (Buffer 2 receives no capacity while X >= x*).
Vector compensating_rates(const std::vector<BoundaryState>& states, const ModelParams& params);

// Rows of the kernel that share one transform argument.
struct KernelGroup {
  RowGroup kind = RowGroup::kSticky;
  std::vector<int> members;  // boundary-state indices
};

// Semi-Markov compensating source built on the Buffer-1 jump chain.
class CompensatingSource {
 public:
  explicit CompensatingSource(const ModelParams& params, double tol = 1e-12);

  const ModelParams& params() const { return params_; }
  const PhasePartition& partition() const { return part_; }
  const std::vector<BoundaryState>& states() const { return chain_.states; }
  int size() const { return static_cast<int>(chain_.states.size()); }
  const Vector& rates() const { return rates_; }
  const Matrix& omega() const { return omega_; }
  const Matrix& generator() const { return T_; }
  const std::vector<KernelGroup>& groups() const { return groups_; }
  int group_of(int state) const { return group_of_[state]; }

  // Kernel transform with one argument per row (constant inside a group);
  // nullopt when some row is evaluated beyond its abscissa.
  std::optional<Matrix> try_kernel(const Vector& shifts) const;
  // Omega~(s) with every row at s; throws TransformDivergence.
  Matrix kernel_lst(double s) const;
  // Rows of one group at s, as a |members| x size() matrix.
  std::optional<Matrix> try_group_rows(int group, double s) const;

  // Abscissa of convergence of a group's transform (minus the asymptotic
  // decay rate of its sojourn times). Computed on construction.
  double abscissa(int group) const;

 private:
  bool fill_group(int group, double s, BoundaryChain& work) const;

  ModelParams params_;
  PhasePartition part_;
  Matrix T_;
  BandBlocks band1_, band2_;
  BoundaryChain chain_;
  Matrix omega_;
  Vector rates_;
  std::vector<KernelGroup> groups_;
  std::vector<int> group_of_;
  double tol_;
  mutable std::vector<std::optional<double>> abscissa_cache_;
};

// Effective bandwidth of one exponential ON-OFF source of Buffer 2.
double eb_exponential(const ModelParams& params, double v);

std::optional<Matrix> try_phi_matrix(const CompensatingSource& src, double v, double u);
Matrix phi_matrix(const CompensatingSource& src, double v, double u);

// Largest real eigenvalue of Phi(v, u); +infinity where Phi diverges.
double chi(const CompensatingSource& src, double v, double u);

// Smallest u in [0, c] with chi(Phi(v, u)) <= 1, by bisection. This is the
// root of chi = 1 unless chi jumps past 1 at the edge of convergence.
double eb_compensating(const CompensatingSource& src, double v, double tol = 1e-13);

// Root of eb_c(v) + N eb_e(v) = c.
double solve_eta(const CompensatingSource& src, double tol = 1e-10);

struct SourceWeights {
  RowVector omega;  // stationary vector of Omega
  Vector tau;       // expected sojourn times
  RowVector p;      // time-stationary state probabilities
  RowVector h;      // left Perron vector of Phi(eta, eb_c(eta))
  double perron = 0.0;
};

// Expected sojourn times from a Richardson-extrapolated central difference
// of the kernel row sums at 0.
Vector sojourn_times(const CompensatingSource& src);

SourceWeights weights_and_eigen(const CompensatingSource& src, double eta, double eb_c);

enum class FailureShape { kConstant, kIncreasing, kDecreasing, kMixed };

struct XiCoefficient {
  double min = 0.0;
  double max = 0.0;
  FailureShape shape = FailureShape::kMixed;
  bool valid = false;  // false: excluded (non-finite f)
};

struct XiContext {
  double eta = 0.0;
  double eb_c = 0.0;
  const SourceWeights* weights = nullptr;
  int grid_points = 200;
};

// Failure rate of the sojourn law [Omega(x)]_ij by transform inversion.
double failure_rate(const CompensatingSource& src, int i, int j, double x);

// Classification of lambda_ij on a grid of n points over (0, x_max].
FailureShape classify_failure_rate(const CompensatingSource& src, int i, int j, double x_max,
                                   int n, double tol = 1e-6);

XiCoefficient xi_coefficients(const CompensatingSource& src, const XiContext& ctx, int i, int j);

struct Buffer2Bounds {
  double eta = 0.0;
  double eb_c = 0.0;
  double eb_e = 0.0;
  SourceWeights weights;
  Vector rates;
  Matrix omega;
  Matrix phi;
  Matrix xi_min, xi_max;  // NaN where not admissible
  std::vector<FailureShape> shapes;  // per (i, j), row-major
  double H_c = 0.0;
  std::vector<double> D;  // D(s), s = 1..N
  double K_lower = 0.0;
  double K_upper = 0.0;
  int excluded_pairs = 0;

  std::pair<double, double> tail_bounds(double x) const;
};

struct Buffer2Options {
  double tol = 1e-12;
  double eta_tol = 1e-10;
  int grid_points = 200;
};

Buffer2Bounds analyze_buffer2(const ModelParams& params, const Buffer2Options& opts = {});

}  // namespace fluidq
