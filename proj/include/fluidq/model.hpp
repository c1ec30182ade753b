#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fluidq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Scalar inputs of the two-buffer model. Buffer 1 is fed by N sources with
// (alpha1, beta1, R1), Buffer 2 by N sources with (alpha2, beta2, R2). The
// output capacity c = c1 + c2 is split while X < x_star and goes entirely to
// Buffer 1 while X > x_star.
struct ModelParams {
  int N = 1;
  double alpha1 = 0.0;
  double beta1 = 0.0;
  double R1 = 0.0;
  double alpha2 = 0.0;
  double beta2 = 0.0;
  double R2 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c = 0.0;
  double x_star = 0.0;
  std::optional<double> V;

  bool finite() const { return V.has_value(); }
};

// Convenience constructor that sets c = c1 + c2.
ModelParams make_params(int N, double alpha1, double beta1, double R1,
                        double alpha2, double beta2, double R2, double c1,
                        double c2, double x_star,
                        std::optional<double> V = std::nullopt);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

// Which assumptions to check. The Buffer-1 scope ignores everything that
// only concerns Buffer 2.
enum class AssumptionScope { kBuffer1, kFull };

Matrix build_generator(int N, double alpha, double beta);
RowVector stationary_onoff(int N, double alpha, double beta);
ValidationReport check_assumptions(const ModelParams& params,
                                   AssumptionScope scope = AssumptionScope::kFull);

// Mean input of N sources, N R beta / (alpha + beta).
double mean_rate(int N, double alpha, double beta, double R);

using PhaseSet = std::vector<int>;

struct PhasePartition {
  PhaseSet S_s_o, S_u_o;
  PhaseSet S_minus_1, S_plus_1;
  PhaseSet S_d_star, S_s_star, S_u_star;
  PhaseSet S_minus_2, S_plus_2;
  PhaseSet S_s_V, S_d_V;  // empty for an infinite buffer
};

PhasePartition partition_states(const ModelParams& params);

bool contains(const PhaseSet& set, int phase);

// Signed net rate of phase i in band k: i R1 - c1 (k = 1) or i R1 - c (k = 2).
double band_rate(const ModelParams& params, int band, int phase);

struct BandBlocks {
  int band = 1;
  PhaseSet minus, plus;
  Matrix T_mm, T_mp, T_pm, T_pp;
  Vector C_minus, C_plus;  // diagonals of absolute net rates
  Vector C_full;           // |net rate| of every phase 0..N
};

BandBlocks band_blocks(const ModelParams& params,
                       const PhasePartition& partition, int band);

// Extracts rows and columns of m indexed by the given phase lists.
Matrix submatrix(const Matrix& m, const PhaseSet& rows, const PhaseSet& cols);

}  // namespace fluidq
