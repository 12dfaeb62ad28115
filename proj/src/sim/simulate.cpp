#include <cmath>

#include "rssforge/sim/sim.hpp"

namespace rssforge::sim {

symbolic::ExactStore Instance::lane_store() const {
  namespace vars = scenarios::vars;
  using symbolic::from_double;
  return {{vars::x_sv, from_double(-x_sv)},
          {vars::v_sv, from_double(v_sv)},
          {vars::x_pov, from_double(-x_pov)},
          {vars::v_pov, from_double(v_pov)}};
}

namespace {

enum class Zone { kBefore, kIn, kAfter };

// Continuous state and discrete mode of both vehicles.
struct World {
  double x[2];
  double v[2];
  bool sv_braking = false;
  bool stopped[2] = {false, false};
  bool pov_reacting = false;
  Zone zone[2] = {Zone::kBefore, Zone::kBefore};
  std::optional<double> t_react;
};

struct Params {
  double b, rho, a_pov;
  double start[2], end[2];
};

double accel(const World& w, int k, const Params& p) {
  if (w.stopped[k]) return 0.0;
  if (k == 0) return w.sv_braking ? -p.b : 0.0;
  return w.pov_reacting ? -p.b : p.a_pov;
}

// RK4 on x' = v, v' = a with a fixed over the step.
void rk4(const double x0[2], const double v0[2], const double a[2], double h, double x1[2], double v1[2]) {
  for (int k = 0; k < 2; ++k) {
    double k1x = v0[k];
    double k2x = v0[k] + 0.5 * h * a[k];
    double k3x = k2x;
    double k4x = v0[k] + h * a[k];
    x1[k] = x0[k] + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
    v1[k] = v0[k] + h * a[k];
  }
}

// True when some guard of the current mode holds at (t, x, v).
bool any_guard(const World& w, const Params& p, double t, const double x[2], const double v[2]) {
  if (!w.sv_braking && t >= p.rho) return true;
  for (int k = 0; k < 2; ++k) {
    if (!w.stopped[k] && accel(w, k, p) < 0 && v[k] <= 0) return true;
    if (w.zone[k] == Zone::kBefore && x[k] >= p.start[k]) return true;
    if (w.zone[k] == Zone::kIn && x[k] >= p.end[k]) return true;
  }
  return !w.pov_reacting && w.t_react && t >= *w.t_react;
}

}  // namespace

SimOutcome simulate(const Instance& inst, const Behavior& beh, const IntersectionParams& ip,
                    const program::SimCfg& cfg) {
  cfg.validate();
  Params p{symbolic::to_double(ip.b), symbolic::to_double(ip.rho), beh.a_pov,
           {symbolic::to_double(ip.cz_sv.start), symbolic::to_double(ip.cz_pov.start)},
           {symbolic::to_double(ip.cz_sv.end), symbolic::to_double(ip.cz_pov.end)}};
  World w;
  w.x[0] = -inst.x_sv;
  w.v[0] = inst.v_sv;
  w.x[1] = -inst.x_pov;
  w.v[1] = inst.v_pov;

  SimOutcome out;
  double t0 = 0.0;
  std::uint64_t substeps = 0;
  std::uint64_t steps = 0;
  double t = 0.0;
  auto sample = [&] {
    if (cfg.record_trace) out.trace.push_back(SimSample{t, w.x[0], w.v[0], w.x[1], w.v[1]});
  };

  // Takes every enabled discrete transition; returns true once the run is over.
  auto settle = [&]() {
    bool changed = true;
    while (changed) {
      changed = false;
      if (!w.sv_braking && t >= p.rho) {
        w.sv_braking = true;
        changed = true;
      }
      if (!w.pov_reacting && w.t_react && t >= *w.t_react) {
        w.pov_reacting = true;
        changed = true;
      }
      for (int k = 0; k < 2; ++k) {
        if (!w.stopped[k] && accel(w, k, p) < 0 && w.v[k] <= 0) {
          w.stopped[k] = true;
          w.v[k] = 0.0;
          changed = true;
        }
        if (w.zone[k] == Zone::kBefore && w.x[k] >= p.start[k]) {
          w.zone[k] = Zone::kIn;
          changed = true;
          if (k == 0) {
            out.t_sv_enter = t;
            w.t_react = t + p.rho;
          }
        }
        if (w.zone[k] == Zone::kIn && w.x[k] >= p.end[k]) {
          w.zone[k] = Zone::kAfter;
          changed = true;
        }
      }
      if (w.zone[0] == Zone::kIn && w.zone[1] == Zone::kIn) {
        out.collision = true;
        out.t_collision = t;
        return true;
      }
    }
    // No collision can follow once either car is past its zone, a car has
    // stopped before its zone, or both cars have stopped.
    if (w.zone[0] == Zone::kAfter || w.zone[1] == Zone::kAfter) return true;
    if (w.stopped[0] && w.zone[0] == Zone::kBefore) return true;
    bool pov_stays = w.stopped[1] && (w.pov_reacting || p.a_pov <= 0);
    if (pov_stays && w.zone[1] == Zone::kBefore) return true;
    return w.stopped[0] && pov_stays;
  };

  sample();
  while (!settle()) {
    if (++steps > cfg.max_steps || t > cfg.horizon) {
      out.horizon_exceeded = true;
      break;
    }
    double a[2] = {accel(w, 0, p), accel(w, 1, p)};
    double x1[2];
    double v1[2];
    double t_next = t0 + static_cast<double>(substeps + 1) * cfg.dt;
    rk4(w.x, w.v, a, t_next - t, x1, v1);
    if (!any_guard(w, p, t_next, x1, v1)) {
      w.x[0] = x1[0];
      w.x[1] = x1[1];
      w.v[0] = v1[0];
      w.v[1] = v1[1];
      ++substeps;
      t = t_next;
      sample();
      continue;
    }
    double lo = 0.0;
    double hi = t_next - t;
    while (hi - lo > cfg.event_tol) {
      double mid = 0.5 * (lo + hi);
      rk4(w.x, w.v, a, mid, x1, v1);
      if (any_guard(w, p, t + mid, x1, v1)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    rk4(w.x, w.v, a, hi, x1, v1);
    w.x[0] = x1[0];
    w.x[1] = x1[1];
    w.v[0] = v1[0];
    w.v[1] = v1[1];
    t += hi;
    t0 = t;
    substeps = 0;
    sample();
  }
  out.t_end = t;
  return out;
}

}  // namespace rssforge::sim
