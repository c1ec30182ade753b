#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#ifdef FLUIDQ_HAVE_SPDLOG
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>
#endif

#include "fluidq/buffer1.hpp"
#include "fluidq/buffer2.hpp"
#include "fluidq/errors.hpp"
#include "fluidq/sim.hpp"

namespace fluidq::app {

namespace {

using nlohmann::json;

void log_warn(const std::string& msg) {
#ifdef FLUIDQ_HAVE_SPDLOG
  spdlog::warn(msg);
#else
  const char* env = std::getenv("FLUIDQ_LOG");
  const std::string level = env ? env : "warn";
  if (level != "error" && level != "off") std::fprintf(stderr, "[warn] %s\n", msg.c_str());
#endif
}

void log_info(const std::string& msg) {
#ifdef FLUIDQ_HAVE_SPDLOG
  spdlog::info(msg);
#else
  (void)msg;
#endif
}

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv(double v) { return fixed(v, 6); }

std::string v_label(const std::optional<double>& V) {
  if (!V) return "inf";
  std::ostringstream os;
  os << *V;
  return os.str();
}

void write_output(const RunConfig& cfg, const std::string& csv_text, const json& doc) {
  if (!cfg.output.path) return;
  std::ofstream out(*cfg.output.path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + *cfg.output.path);
  if (cfg.output.format == OutputFormat::kCsv) {
    out << csv_text;
  } else {
    out << doc.dump(2) << "\n";
  }
}

const ModelParams& require_model(const RunConfig& cfg) {
  if (!cfg.model) throw ConfigError("config has no 'model' section");
  return *cfg.model;
}

// Maps library exceptions onto the exit-code contract.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << "\n";
    return kInvalidModel;
  } catch (const ModelError& e) {
    err << e.what() << "\n";
    return kInvalidModel;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kInvalidModel;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

std::vector<double> default_x_grid(const ModelParams& p) {
  std::vector<double> g = {0.5 * p.x_star, p.x_star, 3.0};
  if (p.V) g.push_back(0.5 * (p.x_star + *p.V));
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

}  // namespace

void configure_logging() {
#ifdef FLUIDQ_HAVE_SPDLOG
  auto logger = spdlog::stderr_logger_st("fluidq");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("FLUIDQ_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
#endif
}

ModelParams scenario_params(char scenario, std::optional<double> V) {
  double c1;
  switch (scenario) {
    case 'A':
      c1 = 1.6;
      break;
    case 'E':
      c1 = 1.19;
      break;
    case 'F':
      c1 = 0.2;
      break;
    default:
      throw std::invalid_argument(std::string("unknown scenario ") + scenario);
  }
  return make_params(1, 11.0, 1.0, 12.48, 11.0, 1.0, 12.48, c1, 2.6 - c1, 1.5, V);
}

std::vector<TableCell> reproduce_tables() {
  struct Published {
    char scenario;
    double x_star[3];
    double three[3];
  };
  const Published published[] = {
      {'A', {0.1411, 0.1660, 0.1706}, {0.0237, 0.0519, 0.0572}},
      {'E', {0.1615, 0.1891, 0.1942}, {0.0271, 0.0592, 0.0651}},
      {'F', {0.3009, 0.3426, 0.3501}, {0.0505, 0.1072, 0.1173}},
  };
  const std::optional<double> sizes[] = {3.5, 6.0, 20.0, std::nullopt};
  std::vector<TableCell> cells;
  for (const Published& row : published) {
    for (int k = 0; k < 4; ++k) {
      const ModelParams p = scenario_params(row.scenario, sizes[k]);
      const StationaryBuffer1 b = StationaryBuffer1::solve(p);
      TableCell cell;
      cell.scenario = row.scenario;
      cell.V = sizes[k];
      cell.tail_x_star = b.tail(p.x_star);
      cell.tail_3 = b.tail(3.0);
      // The infinite column is printed equal to V = 20.
      cell.published_x_star = row.x_star[std::min(k, 2)];
      cell.published_3 = row.three[std::min(k, 2)];
      cells.push_back(cell);
    }
  }
  return cells;
}

int cmd_analyze_buffer1(const RunConfig& cfg, std::ostream& report, std::ostream& err) {
  return guarded(err, [&] {
    const ModelParams& p = require_model(cfg);
    const ValidationReport check = check_assumptions(p, AssumptionScope::kBuffer1);
    if (!check.ok()) throw ModelError("assumption violated: " + check.summary());
    const StationaryBuffer1 b = StationaryBuffer1::solve(p, cfg.analysis.tol);
    const std::vector<double> xs =
        cfg.analysis.x_grid.empty() ? default_x_grid(p) : cfg.analysis.x_grid;

    report << "Buffer 1, N = " << p.N << ", V = " << v_label(p.V) << "\n";
    report << "kappa = " << fixed(b.kappa(), 6) << "\n";
    report << "mass at 0 = " << fixed(b.mass_at(Level::kZero), 6) << "\n";
    report << "mass at x* = " << fixed(b.mass_at(Level::kStar), 6) << "\n";
    if (p.V) report << "mass at V = " << fixed(b.mass_at(Level::kTop), 6) << "\n";

    std::ostringstream csv_text;
    csv_text << "x,cdf,tail,density";
    for (int i = 0; i <= p.N; ++i) csv_text << ",density_" << i;
    csv_text << "\n";
    json rows = json::array();
    for (double x : xs) {
      const bool interior = x > 0.0 && x != p.x_star && (!p.V || x < *p.V);
      RowVector dens;
      if (interior) dens = b.density(x);
      const double tail = b.tail(x);
      const double cdf = b.cdf(x);
      report << "tail(" << x << ") = " << fixed(tail, 4) << "\n";
      csv_text << csv(x) << "," << csv(cdf) << "," << csv(tail) << ",";
      json row = {{"x", x}, {"cdf", cdf}, {"tail", tail}};
      if (interior) {
        csv_text << csv(dens.sum());
        for (int i = 0; i <= p.N; ++i) csv_text << "," << csv(dens(i));
        row["density"] = std::vector<double>(dens.data(), dens.data() + dens.size());
      } else {
        for (int i = 0; i <= p.N; ++i) csv_text << ",";
        row["density"] = nullptr;
      }
      csv_text << "\n";
      rows.push_back(row);
    }
    const RowVector m = b.masses();
    json doc = {{"command", "analyze-buffer1"},
                {"kappa", b.kappa()},
                {"mass_zero", b.mass_at(Level::kZero)},
                {"mass_star", b.mass_at(Level::kStar)},
                {"sticky_masses", std::vector<double>(m.data(), m.data() + m.size())},
                {"rows", rows}};
    if (p.V) doc["mass_top"] = b.mass_at(Level::kTop);
    write_output(cfg, csv_text.str(), doc);
    return kOk;
  });
}

int cmd_bounds_buffer2(const RunConfig& cfg, std::ostream& report, std::ostream& err) {
  return guarded(err, [&] {
    const ModelParams& p = require_model(cfg);
    const ValidationReport check = check_assumptions(p, AssumptionScope::kFull);
    if (!check.ok()) throw ModelError("assumption violated: " + check.summary());
    Buffer2Options opts;
    opts.tol = cfg.analysis.tol;
    opts.grid_points = cfg.analysis.grid_points;
    const Buffer2Bounds r = analyze_buffer2(p, opts);
    if (r.excluded_pairs > 0) {
      log_warn(std::to_string(r.excluded_pairs) +
               " state pairs excluded from the bounds (non-finite f_ij)");
    }
    const std::vector<double> ys =
        cfg.analysis.y_grid.empty() ? std::vector<double>{1.0, 2.0, 4.0, 8.0} : cfg.analysis.y_grid;

    report << "Buffer 2 bounds, N = " << p.N << ", V = " << v_label(p.V) << "\n";
    report << "eta = " << fixed(r.eta, 8) << "\n";
    report << "eb_c(eta) = " << fixed(r.eb_c, 8) << ", eb_e(eta) = " << fixed(r.eb_e, 8) << "\n";
    report << "H_c = " << fixed(r.H_c, 6) << "\n";
    report << "K_lower = " << fixed(r.K_lower, 6) << ", K_upper = " << fixed(r.K_upper, 6) << "\n";

    std::ostringstream csv_text;
    csv_text << "y,eta,lower,upper\n";
    json rows = json::array();
    for (double y : ys) {
      const auto [lo, hi] = r.tail_bounds(y);
      report << "P(Y > " << y << ") in [" << fixed(lo, 4) << ", " << fixed(hi, 4) << "]\n";
      csv_text << csv(y) << "," << csv(r.eta) << "," << csv(lo) << "," << csv(hi) << "\n";
      rows.push_back({{"y", y}, {"eta", r.eta}, {"lower", lo}, {"upper", hi}});
    }
    json doc = {{"command", "bounds-buffer2"},
                {"eta", r.eta},
                {"eb_c", r.eb_c},
                {"eb_e", r.eb_e},
                {"H_c", r.H_c},
                {"K_lower", r.K_lower},
                {"K_upper", r.K_upper},
                {"excluded_pairs", r.excluded_pairs},
                {"rows", rows}};
    write_output(cfg, csv_text.str(), doc);
    return kOk;
  });
}

int cmd_simulate(const RunConfig& cfg, std::ostream& report, std::ostream& err) {
  return guarded(err, [&] {
    const ModelParams& p = require_model(cfg);
    SimConfig sc = cfg.simulation;
    if (sc.x_grid.empty() && sc.y_grid.empty()) sc.x_grid = default_x_grid(p);
    const ValidationReport check = check_assumptions(p, AssumptionScope::kFull);
    if (!check.ok()) log_warn("simulating a model that violates assumptions: " + check.summary());
    log_info("simulating horizon " + std::to_string(sc.horizon) + " x " +
             std::to_string(sc.replications) + " replications");
    const SimEstimate e = simulate(p, sc);
    if (e.diverged) log_warn("mean input exceeds capacity; estimates are not stationary");

    report << "Simulation, horizon = " << sc.horizon << ", replications = " << e.replications
           << ", seed = " << sc.seed << "\n";
    std::ostringstream csv_text;
    csv_text << "buffer,level,estimate,std_error\n";
    json xs = json::array(), ys = json::array();
    auto emit = [&](const char* name, const std::vector<LevelEstimate>& est, json& arr) {
      for (const LevelEstimate& l : est) {
        report << "P(" << name << " > " << l.level << ") = " << fixed(l.tail, 4) << " +- "
               << fixed(l.std_error, 4) << "\n";
        csv_text << name << "," << csv(l.level) << "," << csv(l.tail) << "," << csv(l.std_error)
                 << "\n";
        arr.push_back({{"level", l.level}, {"estimate", l.tail}, {"std_error", l.std_error}});
      }
    };
    emit("X", e.x_tail, xs);
    emit("Y", e.y_tail, ys);
    json doc = {{"command", "simulate"},
                {"seed", sc.seed},
                {"horizon", sc.horizon},
                {"replications", e.replications},
                {"diverged", e.diverged},
                {"x_tail", xs},
                {"y_tail", ys}};
    write_output(cfg, csv_text.str(), doc);
    return kOk;
  });
}

int cmd_reproduce_tables(const RunConfig& cfg, std::ostream& report, std::ostream& err) {
  return guarded(err, [&] {
    const std::vector<TableCell> cells = reproduce_tables();
    int flagged = 0;
    auto print_table = [&](const char* title, double TableCell::*value,
                           double TableCell::*published) {
      report << title << "\n";
      report << "scenario      V=3.5      V=6       V=20      V=inf\n";
      for (char s : {'A', 'E', 'F'}) {
        report << "   " << s << "     ";
        for (const TableCell& c : cells) {
          if (c.scenario != s) continue;
          const bool off = std::abs(c.*value - c.*published) > 5e-4;
          flagged += off;
          report << "  " << fixed(c.*value, 4) << (off ? "*" : " ") << "  ";
        }
        report << "\n";
      }
    };
    print_table("lim P(X > x*)", &TableCell::tail_x_star, &TableCell::published_x_star);
    print_table("lim P(X > 3)", &TableCell::tail_3, &TableCell::published_3);
    if (flagged) {
      report << flagged << " cell(s) marked * deviate from the published value by more than 5e-4\n";
    } else {
      report << "all cells within 5e-4 of the published values\n";
    }

    std::ostringstream csv_text;
    csv_text << "scenario,V,quantity,value,published,deviation\n";
    json rows = json::array();
    for (const TableCell& c : cells) {
      const std::pair<const char*, std::pair<double, double>> q[] = {
          {"tail_x_star", {c.tail_x_star, c.published_x_star}},
          {"tail_3", {c.tail_3, c.published_3}}};
      for (const auto& [name, vals] : q) {
        csv_text << c.scenario << "," << v_label(c.V) << "," << name << "," << fixed(vals.first, 4)
                 << "," << fixed(vals.second, 4) << "," << csv(vals.first - vals.second) << "\n";
        json row = {{"scenario", std::string(1, c.scenario)},
                    {"quantity", name},
                    {"value", vals.first},
                    {"published", vals.second}};
        row["V"] = c.V ? json(*c.V) : json(nullptr);
        rows.push_back(row);
      }
    }
    write_output(cfg, csv_text.str(), {{"command", "reproduce-tables"}, {"cells", rows}});
    return kOk;
  });
}

}  // namespace fluidq::app
