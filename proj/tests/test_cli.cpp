#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include <json.hpp>

using namespace fluidq;
using namespace fluidq::app;

namespace {

const char* kModel = R"("model": {"N": 1, "alpha1": 11, "beta1": 1, "R1": 12.48,
  "alpha2": 11, "beta2": 1, "R2": 12.48, "c1": 1.6, "c2": 1.0, "x_star": 1.5)";

std::string with_model(const std::string& extra_model, const std::string& rest = "") {
  return std::string("{") + kModel + extra_model + "}" + rest + "}";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("fluidq_test_" + name);
}

}  // namespace

TEST(Config, ParsesModelAndDefaults) {
  const RunConfig cfg = parse_config(with_model(""));
  ASSERT_TRUE(cfg.model.has_value());
  EXPECT_DOUBLE_EQ(cfg.model->c, 2.6);
  EXPECT_FALSE(cfg.model->V.has_value());
  EXPECT_EQ(cfg.output.format, OutputFormat::kCsv);
  EXPECT_DOUBLE_EQ(cfg.simulation.horizon, 1e6);
}

TEST(Config, FiniteBufferAndSections) {
  const RunConfig cfg = parse_config(with_model(R"(, "V": 3.5)",
      R"(, "analysis": {"x_grid": [1, 2]}, "simulation": {"seed": 18446744073709551615, "replications": 3},
         "output": {"path": "out.json", "format": "json"})"));
  EXPECT_DOUBLE_EQ(*cfg.model->V, 3.5);
  EXPECT_EQ(cfg.analysis.x_grid, (std::vector<double>{1, 2}));
  EXPECT_EQ(cfg.simulation.x_grid, cfg.analysis.x_grid);
  EXPECT_EQ(cfg.simulation.seed, 18446744073709551615ull);
  EXPECT_EQ(cfg.simulation.replications, 3);
  EXPECT_EQ(*cfg.output.path, "out.json");
  EXPECT_EQ(cfg.output.format, OutputFormat::kJson);
}

TEST(Config, RejectsUnknownKeysAndBadTypes) {
  EXPECT_THROW(parse_config(with_model(R"(, "buffer": 2)")), ConfigError);
  EXPECT_THROW(parse_config(with_model("", R"(, "extra": {})")), ConfigError);
  EXPECT_THROW(parse_config(with_model("", R"(, "simulation": {"horizn": 5})")), ConfigError);
  EXPECT_THROW(parse_config(R"({"model": {"N": "one"}})"), ConfigError);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
  EXPECT_THROW(parse_format("xml"), ConfigError);
}

TEST(Commands, AnalyzeInfiniteBufferReport) {
  RunConfig cfg = parse_config(with_model("", R"(, "analysis": {"x_grid": [1.5, 3]})"));
  std::ostringstream report, err;
  EXPECT_EQ(cmd_analyze_buffer1(cfg, report, err), kOk) << err.str();
  EXPECT_NE(report.str().find("tail(1.5) = 0.1706"), std::string::npos) << report.str();
  EXPECT_NE(report.str().find("tail(3) = 0.0572"), std::string::npos);
}

TEST(Commands, AnalyzeWritesCsvAndJson) {
  RunConfig cfg = parse_config(with_model("", R"(, "analysis": {"x_grid": [3]})"));
  cfg.model = scenario_params('E', 6.0);
  std::ostringstream report, err;
  const auto csv_path = temp_file("analyze.csv");
  cfg.output.path = csv_path.string();
  ASSERT_EQ(cmd_analyze_buffer1(cfg, report, err), kOk) << err.str();
  EXPECT_NE(report.str().find("tail(3) = 0.0592"), std::string::npos) << report.str();
  const std::string csv = slurp(csv_path);
  EXPECT_EQ(csv.rfind("x,cdf,tail,density", 0), 0u);

  const auto json_path = temp_file("analyze.json");
  cfg.output.path = json_path.string();
  cfg.output.format = OutputFormat::kJson;
  ASSERT_EQ(cmd_analyze_buffer1(cfg, report, err), kOk);
  EXPECT_TRUE(nlohmann::json::parse(slurp(json_path)).is_object());
  std::filesystem::remove(csv_path);
  std::filesystem::remove(json_path);
}

TEST(Commands, ExitCodesFollowTheContract) {
  std::ostringstream report, err;
  RunConfig none;
  EXPECT_EQ(cmd_analyze_buffer1(none, report, err), kInvalidModel);

  RunConfig integral = parse_config(with_model(""));
  integral.model->c1 = integral.model->R1;
  integral.model->c = integral.model->c1 + integral.model->c2;
  EXPECT_EQ(cmd_analyze_buffer1(integral, report, err), kInvalidModel);

  RunConfig silent = parse_config(with_model(""));
  silent.model->beta2 = 0.0;
  EXPECT_EQ(cmd_bounds_buffer2(silent, report, err), kInvalidModel);

  RunConfig ok = parse_config(with_model(""));
  EXPECT_EQ(cmd_bounds_buffer2(ok, report, err), kOk) << err.str();
  EXPECT_EQ(cmd_reproduce_tables(RunConfig{}, report, err), kOk);
}

TEST(Commands, TablesReproducePublishedCells) {
  for (const TableCell& c : reproduce_tables()) {
    EXPECT_NEAR(c.tail_x_star, c.published_x_star, 5e-4);
    EXPECT_NEAR(c.tail_3, c.published_3, 5e-4);
  }
}

TEST(Commands, SimulationOutputIsByteIdentical) {
  RunConfig cfg = parse_config(with_model("", R"(, "simulation": {"horizon": 20000, "seed": 5, "replications": 2})"));
  std::ostringstream report, err;
  const auto a = temp_file("sim_a.csv"), b = temp_file("sim_b.csv");
  cfg.output.path = a.string();
  ASSERT_EQ(cmd_simulate(cfg, report, err), kOk) << err.str();
  cfg.output.path = b.string();
  ASSERT_EQ(cmd_simulate(cfg, report, err), kOk);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(a).rfind("buffer,level,estimate,std_error", 0), 0u);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}
