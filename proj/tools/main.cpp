#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"

using namespace fluidq::app;

int main(int argc, char** argv) {
  CLI::App app{"Two-buffer fluid queue analysis"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_path, format;
  std::uint64_t seed = 0;
  double tol = 0.0;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_path, "write machine-readable results here");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  CLI::Option* seed_opt = app.add_option("--seed", seed, "simulation seed (u64)");
  CLI::Option* tol_opt = app.add_option("--tol", tol, "solver tolerance");

  auto* analyze = app.add_subcommand("analyze-buffer1", "stationary distribution of Buffer 1");
  auto* bounds = app.add_subcommand("bounds-buffer2", "exponential tail bounds for Buffer 2");
  auto* sim = app.add_subcommand("simulate", "Monte Carlo estimates of both buffers");
  auto* tables = app.add_subcommand("reproduce-tables", "published Buffer-1 tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  configure_logging();
  RunConfig cfg;
  if (!config_path.empty()) {
    try {
      cfg = load_config(config_path);
    } catch (const ConfigError& e) {
      std::cerr << "invalid config: " << e.what() << "\n";
      return kInvalidModel;
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      return kUsage;
    }
  } else if (!tables->parsed()) {
    std::cerr << "--config is required for this command\n";
    return kUsage;
  }
  if (!out_path.empty()) cfg.output.path = out_path;
  if (!format.empty()) cfg.output.format = parse_format(format);
  if (seed_opt->count()) cfg.simulation.seed = seed;
  if (tol_opt->count()) cfg.analysis.tol = tol;

  if (analyze->parsed()) return cmd_analyze_buffer1(cfg, std::cout, std::cerr);
  if (bounds->parsed()) return cmd_bounds_buffer2(cfg, std::cout, std::cerr);
  if (sim->parsed()) return cmd_simulate(cfg, std::cout, std::cerr);
  return cmd_reproduce_tables(cfg, std::cout, std::cerr);
}
