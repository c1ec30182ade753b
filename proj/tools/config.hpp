#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fluidq/model.hpp"
#include "fluidq/sim.hpp"

namespace fluidq::app {

// Malformed configuration: bad JSON, wrong types or unknown keys.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { kCsv, kJson };

struct AnalysisOptions {
  std::vector<double> x_grid;
  std::vector<double> y_grid;
  double tol = 1e-12;
  int grid_points = 200;
};

struct OutputOptions {
  std::optional<std::string> path;
  OutputFormat format = OutputFormat::kCsv;
};

struct RunConfig {
  std::optional<ModelParams> model;
  AnalysisOptions analysis;
  SimConfig simulation;
  OutputOptions output;
};

// Top-level keys: model, analysis, simulation, output. Every section is
// optional; unknown keys anywhere are rejected.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

OutputFormat parse_format(const std::string& name);

}  // namespace fluidq::app
