#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fluidq::app {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& known) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

double number(const json& obj, const std::string& where, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

double required(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return number(obj, where, key, 0.0);
}

std::vector<double> grid(const json& obj, const std::string& where, const char* key,
                         std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(where + "." + key + ": expected an array of numbers");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) throw ConfigError(where + "." + key + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

int integer(const json& obj, const std::string& where, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

ModelParams parse_model(const json& m) {
  const std::string w = "model";
  reject_unknown(m, w,
                 {"N", "alpha1", "beta1", "R1", "alpha2", "beta2", "R2", "c1", "c2", "x_star", "V"});
  std::optional<double> V;
  if (m.contains("V") && !m.at("V").is_null()) V = required(m, w, "V");
  if (!m.contains("N")) throw ConfigError("model: missing key 'N'");
  return make_params(integer(m, w, "N", 1), required(m, w, "alpha1"), required(m, w, "beta1"),
                     required(m, w, "R1"), number(m, w, "alpha2", 0.0), number(m, w, "beta2", 0.0),
                     number(m, w, "R2", 0.0), required(m, w, "c1"), required(m, w, "c2"),
                     required(m, w, "x_star"), V);
}

}  // namespace

OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "json") return OutputFormat::kJson;
  throw ConfigError("output.format: expected 'csv' or 'json', got '" + name + "'");
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, "config", {"model", "analysis", "simulation", "output"});

  RunConfig cfg;
  if (doc.contains("model")) cfg.model = parse_model(doc.at("model"));

  if (doc.contains("analysis")) {
    const json& a = doc.at("analysis");
    reject_unknown(a, "analysis", {"x_grid", "y_grid", "tol", "grid_points"});
    cfg.analysis.x_grid = grid(a, "analysis", "x_grid", {});
    cfg.analysis.y_grid = grid(a, "analysis", "y_grid", {});
    cfg.analysis.tol = number(a, "analysis", "tol", cfg.analysis.tol);
    cfg.analysis.grid_points = integer(a, "analysis", "grid_points", cfg.analysis.grid_points);
  }

  SimConfig& sim = cfg.simulation;
  sim.x_grid = cfg.analysis.x_grid;
  sim.y_grid = cfg.analysis.y_grid;
  if (doc.contains("simulation")) {
    const json& s = doc.at("simulation");
    const std::string w = "simulation";
    reject_unknown(s, w,
                   {"horizon", "warmup", "seed", "replications", "batches", "threads", "x_grid",
                    "y_grid"});
    sim.horizon = number(s, w, "horizon", sim.horizon);
    sim.warmup = number(s, w, "warmup", sim.warmup);
    if (s.contains("seed")) {
      if (!s.at("seed").is_number_unsigned()) throw ConfigError("simulation.seed: expected a u64");
      sim.seed = s.at("seed").get<std::uint64_t>();
    }
    sim.replications = integer(s, w, "replications", sim.replications);
    sim.batches = integer(s, w, "batches", sim.batches);
    sim.threads = integer(s, w, "threads", sim.threads);
    sim.x_grid = grid(s, w, "x_grid", sim.x_grid);
    sim.y_grid = grid(s, w, "y_grid", sim.y_grid);
  }

  if (doc.contains("output")) {
    const json& o = doc.at("output");
    reject_unknown(o, "output", {"path", "format"});
    if (o.contains("path")) {
      if (!o.at("path").is_string()) throw ConfigError("output.path: expected a string");
      cfg.output.path = o.at("path").get<std::string>();
    }
    if (o.contains("format")) {
      if (!o.at("format").is_string()) throw ConfigError("output.format: expected a string");
      cfg.output.format = parse_format(o.at("format").get<std::string>());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace fluidq::app
