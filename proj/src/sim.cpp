#include "fluidq/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

namespace fluidq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t rep) : rng_(splitmix64(splitmix64(seed) ^ rep)) {}
  double uniform() { return (rng_() >> 11) * 0x1.0p-53; }
  double exponential() { return -std::log(1.0 - uniform()); }

 private:
  std::mt19937_64 rng_;
};

double x_hit_time(const ModelParams& p, const SimState& s) {
  const double dx = x_drift(p, s);
  if (s.regime == Regime::kBand1) {
    if (dx < 0.0) return s.X / -dx;
    if (dx > 0.0) return (p.x_star - s.X) / dx;
  } else if (s.regime == Regime::kBand2) {
    if (dx < 0.0) return (s.X - p.x_star) / -dx;
    if (dx > 0.0 && p.V) return (*p.V - s.X) / dx;
  }
  return kInf;
}

// Time spent with level > q over a linear segment.
double time_above(double q, double y0, double dy, double dt) {
  if (dy == 0.0) return y0 > q ? dt : 0.0;
  const double tq = std::clamp((q - y0) / dy, 0.0, dt);
  return dy > 0.0 ? dt - tq : tq;
}

struct Replication {
  std::vector<std::vector<double>> x_batches, y_batches;  // [level][batch]
  RowVector occupancy;
  Matrix transitions;
};

class Runner {
 public:
  Runner(const ModelParams& p, const SimConfig& cfg, const std::vector<BoundaryState>& states)
      : p_(p), cfg_(cfg), states_(states) {}

  Replication run(std::uint64_t rep) const;

 private:
  int state_index(Level level, Motion motion, int phase) const {
    const BoundaryState key{level, motion, phase};
    for (size_t k = 0; k < states_.size(); ++k) {
      if (states_[k] == key) return k;
    }
    throw std::logic_error("simulate: unknown boundary state " + to_string(key));
  }
  // Boundary state entered when X sits on a boundary (or leaves it) in
  // phase i1 with the given resolved regime.
  int entered(const SimState& s, Level level) const;

  const ModelParams& p_;
  const SimConfig& cfg_;
  const std::vector<BoundaryState>& states_;
};

int Runner::entered(const SimState& s, Level level) const {
  const int i = s.i1;
  switch (level) {
    case Level::kZero:
      return state_index(Level::kZero, s.regime == Regime::kAt0 ? Motion::kSticky : Motion::kUp, i);
    case Level::kStar: {
      const Motion m = s.regime == Regime::kAtStar  ? Motion::kSticky
                       : s.regime == Regime::kBand2 ? Motion::kUp
                                                    : Motion::kDown;
      return state_index(Level::kStar, m, i);
    }
    case Level::kTop:
      return state_index(Level::kTop, s.regime == Regime::kAtTop ? Motion::kSticky : Motion::kDown,
                         i);
  }
  return -1;
}

Replication Runner::run(std::uint64_t rep) const {
  Stream rng(cfg_.seed, rep);
  const double warm = cfg_.effective_warmup();
  const double H = cfg_.horizon;
  const int B = cfg_.batches;
  const double batch_len = (H - warm) / B;
  const int n_states = states_.size();

  Replication out;
  out.x_batches.assign(cfg_.x_grid.size(), std::vector<double>(B, 0.0));
  out.y_batches.assign(cfg_.y_grid.size(), std::vector<double>(B, 0.0));
  out.occupancy = RowVector::Zero(n_states);
  out.transitions = Matrix::Zero(n_states, n_states);

  SimState s;
  s.regime = sticky_resolution(p_, s);
  int current = entered(s, Level::kZero);
  int batch = -1;  // -1 during warmup
  double next_checkpoint = warm > 0.0 ? warm : batch_len;
  if (warm <= 0.0) batch = 0;
  double clock = rng.exponential();
  const double x_star = p_.x_star;

  auto switch_state = [&](int next) {
    if (batch >= 0 && next != current) out.transitions(current, next) += 1.0;
    current = next;
  };

  while (s.t < H) {
    const double dx = x_drift(p_, s);
    const double dy = y_drift(p_, s);
    const double rate = s.i1 * p_.alpha1 + (p_.N - s.i1) * p_.beta1 + s.i2 * p_.alpha2 +
                        (p_.N - s.i2) * p_.beta2;
    const double t_event = rate > 0.0 ? clock / rate : kInf;
    const double t_x = x_hit_time(p_, s);
    const double t_y = dy < 0.0 ? s.Y / -dy : kInf;
    const double t_check = next_checkpoint - s.t;
    const double dt = std::min({t_event, t_x, t_y, t_check});

    if (batch >= 0) {
      for (size_t k = 0; k < cfg_.x_grid.size(); ++k) {
        out.x_batches[k][batch] += time_above(cfg_.x_grid[k], s.X, dx, dt);
      }
      for (size_t k = 0; k < cfg_.y_grid.size(); ++k) {
        out.y_batches[k][batch] += time_above(cfg_.y_grid[k], s.Y, dy, dt);
      }
      out.occupancy(current) += dt;
    }
    s.t += dt;
    s.X += dx * dt;
    s.Y += dy * dt;
    clock -= rate * dt;

    if (dt == t_y) s.Y = 0.0;
    if (dt == t_x) {
      Level level;
      if (s.regime == Regime::kBand1) {
        s.X = dx < 0.0 ? 0.0 : x_star;
        level = dx < 0.0 ? Level::kZero : Level::kStar;
      } else {
        s.X = dx < 0.0 ? x_star : *p_.V;
        level = dx < 0.0 ? Level::kStar : Level::kTop;
      }
      s.regime = sticky_resolution(p_, s);
      switch_state(entered(s, level));
    }
    if (dt == t_check) {
      s.t = next_checkpoint;
      ++batch;
      if (batch >= B) break;
      next_checkpoint = batch == B - 1 ? H : warm + (batch + 1) * batch_len;
    }
    if (dt != t_event || dt == t_x || dt == t_y || dt == t_check) continue;

    // Phase event.
    clock = rng.exponential();
    const double u = rng.uniform() * rate;
    const double d1 = s.i1 * p_.alpha1;
    const double u1 = d1 + (p_.N - s.i1) * p_.beta1;
    const double d2 = u1 + s.i2 * p_.alpha2;
    if (u < d1) {
      --s.i1;
    } else if (u < u1) {
      ++s.i1;
    } else if (u < d2) {
      --s.i2;
      continue;
    } else {
      ++s.i2;
      continue;
    }
    if (s.regime == Regime::kAt0 || s.regime == Regime::kAtStar || s.regime == Regime::kAtTop) {
      const Level level = s.regime == Regime::kAt0     ? Level::kZero
                          : s.regime == Regime::kAtStar ? Level::kStar
                                                        : Level::kTop;
      s.regime = sticky_resolution(p_, s);
      switch_state(entered(s, level));
    }
  }
  return out;
}

void summarize(const std::vector<double>& grid,
               const std::vector<std::vector<std::vector<double>>*>& per_rep, double batch_len,
               std::vector<LevelEstimate>& out) {
  const int R = per_rep.size();
  out.assign(grid.size(), {});
  for (size_t k = 0; k < grid.size(); ++k) {
    double mean = 0.0, var = 0.0;
    for (int r = 0; r < R; ++r) {
      const std::vector<double>& batches = (*per_rep[r])[k];
      const int B = batches.size();
      double m = 0.0;
      for (double b : batches) m += b / batch_len;
      m /= B;
      double ss = 0.0;
      for (double b : batches) ss += (b / batch_len - m) * (b / batch_len - m);
      const double se2 = B > 1 ? ss / (B - 1) / B : 0.0;
      mean += m;
      var += se2;
    }
    out[k].level = grid[k];
    out[k].tail = mean / R;
    out[k].std_error = std::sqrt(var) / R;
  }
}

}  // namespace

double x_drift(const ModelParams& p, const SimState& s) {
  switch (s.regime) {
    case Regime::kBand1:
      return s.i1 * p.R1 - p.c1;
    case Regime::kBand2:
      return s.i1 * p.R1 - p.c;
    default:
      return 0.0;
  }
}

double y_output(const ModelParams& p, const SimState& s) {
  switch (s.regime) {
    case Regime::kAt0:
    case Regime::kAtStar:
      return p.c - s.i1 * p.R1;
    case Regime::kBand1:
      return p.c2;
    default:
      return 0.0;
  }
}

double y_drift(const ModelParams& p, const SimState& s) {
  const double net = s.i2 * p.R2 - y_output(p, s);
  return s.Y <= 0.0 && net <= 0.0 ? 0.0 : net;
}

double boundary_hit_time(const ModelParams& p, const SimState& s) {
  double t = x_hit_time(p, s);
  const double dy = y_drift(p, s);
  if (dy < 0.0) t = std::min(t, s.Y / -dy);
  return t;
}

Regime sticky_resolution(const ModelParams& p, const SimState& s) {
  const double r = s.i1 * p.R1;
  if (s.X == 0.0) return r < p.c1 ? Regime::kAt0 : Regime::kBand1;
  if (s.X == p.x_star) {
    if (r < p.c1) return Regime::kBand1;
    return r < p.c ? Regime::kAtStar : Regime::kBand2;
  }
  if (p.V && s.X == *p.V) return r > p.c ? Regime::kAtTop : Regime::kBand2;
  throw std::invalid_argument("sticky_resolution: X is not on a boundary");
}

SimEstimate simulate(const ModelParams& params, const SimConfig& config) {
  if (!(config.horizon > config.effective_warmup()) || config.effective_warmup() < 0.0) {
    throw std::invalid_argument("simulate: need horizon > warmup >= 0");
  }
  if (config.replications < 1) throw std::invalid_argument("simulate: replications >= 1");
  if (config.batches < 1) throw std::invalid_argument("simulate: batches >= 1");

  const PhasePartition part = partition_states(params);
  SimEstimate est;
  est.states = boundary_states(part, params.finite());
  est.replications = config.replications;
  const double m1 = mean_rate(params.N, params.alpha1, params.beta1, params.R1);
  const double m2 = mean_rate(params.N, params.alpha2, params.beta2, params.R2);
  est.diverged = m1 + m2 >= params.c || (!params.finite() && m1 >= params.c);

  const Runner runner(params, config, est.states);
  std::vector<Replication> reps(config.replications);
  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, config.replications);
  if (threads == 1) {
    for (int r = 0; r < config.replications; ++r) reps[r] = runner.run(r);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (int r = w; r < config.replications; r += threads) reps[r] = runner.run(r);
      });
    }
    for (std::thread& t : pool) t.join();
  }

  const double batch_len = (config.horizon - config.effective_warmup()) / config.batches;
  std::vector<std::vector<std::vector<double>>*> xs, ys;
  const int n = est.states.size();
  est.occupancy = RowVector::Zero(n);
  est.transitions = Matrix::Zero(n, n);
  for (Replication& r : reps) {
    xs.push_back(&r.x_batches);
    ys.push_back(&r.y_batches);
    est.occupancy += r.occupancy;
    est.transitions += r.transitions;
  }
  summarize(config.x_grid, xs, batch_len, est.x_tail);
  summarize(config.y_grid, ys, batch_len, est.y_tail);
  const double total = est.occupancy.sum();
  if (total > 0.0) est.occupancy /= total;
  return est;
}

}  // namespace fluidq
