#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace fluidq::app {

enum ExitCode { kOk = 0, kUsage = 1, kInvalidModel = 2, kNumericalFailure = 3 };

// Reads FLUIDQ_LOG (trace, debug, info, warn, error, off); default warn.
void configure_logging();

// Each command writes a human-readable report to `report`, diagnostics to
// `err`, and the machine-readable result to cfg.output.path when set.
int cmd_analyze_buffer1(const RunConfig& cfg, std::ostream& report, std::ostream& err);
int cmd_bounds_buffer2(const RunConfig& cfg, std::ostream& report, std::ostream& err);
int cmd_simulate(const RunConfig& cfg, std::ostream& report, std::ostream& err);
int cmd_reproduce_tables(const RunConfig& cfg, std::ostream& report, std::ostream& err);

// Published scenarios: A, E and F share R1 = 12.48, alpha1 = 11, beta1 = 1,
// x* = 1.5 and c = 2.6, and differ in c1. Buffer-2 inputs use the reference
// source (alpha2 = 11, beta2 = 1, R2 = 12.48).
ModelParams scenario_params(char scenario, std::optional<double> V);

struct TableCell {
  char scenario = 'A';
  std::optional<double> V;
  double tail_x_star = 0.0;  // lim P(X > x*)
  double tail_3 = 0.0;       // lim P(X > 3)
  double published_x_star = 0.0;
  double published_3 = 0.0;
};

// Rows for scenarios A, E, F and V = 3.5, 6, 20, infinity, in that order.
std::vector<TableCell> reproduce_tables();

}  // namespace fluidq::app
