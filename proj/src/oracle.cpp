#include "bbvp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bbvp/error.hpp"

namespace bbvp {

namespace {

struct State {
  Vec x;
  Vec v;
};

class Stepper {
 public:
  Stepper(const ForceField& field, const BoxDomain& box) : field_(field), box_(box) {}

  /// One classical RK4 step of x' = v, v' = f(t, x).
  State step(double t, const State& s, double dt) const {
    const Vec k1x = s.v;
    const Vec k1v = accel(t, s.x);
    const Vec k2x = s.v + 0.5 * dt * k1v;
    const Vec k2v = accel(t + 0.5 * dt, s.x + 0.5 * dt * k1x);
    const Vec k3x = s.v + 0.5 * dt * k2v;
    const Vec k3v = accel(t + 0.5 * dt, s.x + 0.5 * dt * k2x);
    const Vec k4x = s.v + dt * k3v;
    const Vec k4v = accel(t + dt, s.x + dt * k3x);
    return {s.x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
            s.v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)};
  }

 private:
  // The field is only defined on the box; stage points that overshoot are
  // evaluated at their projection.
  Vec accel(double t, const Vec& x) const {
    return field_(t, x.cwiseMax(box_.lower()).cwiseMin(box_.upper()));
  }

  const ForceField& field_;
  const BoxDomain& box_;
};

}  // namespace

ShootResult simulate(const ForceField& field, const BoxDomain& box, const Vec& x0,
                     const Vec& v0, double horizon, const SimulationOptions& options) {
  if (!box.strictly_interior(x0)) {
    throw Error(ErrorKind::BadInput, "simulation must start strictly inside the box");
  }
  if (options.step_count < 1 || !(options.event_tol > 0.0) || !(horizon > 0.0)) {
    throw Error(ErrorKind::BadInput, "simulation needs step_count >= 1, event_tol > 0, T > 0");
  }
  constexpr int kMaxEventsPerStep = 1000;
  const Stepper stepper(field, box);
  const int n = box.dim();
  const double h = horizon / options.step_count;
  const double tol = options.event_tol * horizon;

  ShootResult out;
  State s{x0, v0};
  double t = 0.0;
  out.t.push_back(t);
  out.x.push_back(s.x);
  out.v.push_back(s.v);

  for (int step = 0; step < options.step_count; ++step) {
    const double t_end = (step + 1 == options.step_count) ? horizon : (step + 1) * h;
    int events = 0;
    while (t < t_end) {
      const double dt = t_end - t;
      const State trial = stepper.step(t, s, dt);
      if (box.contains(trial.x)) {
        s = trial;
        t = t_end;
        break;
      }
      double lo = 0.0;
      double hi = dt;
      for (int it = 0; it < 50 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (box.contains(stepper.step(t, s, mid).x)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const State before = lo > 0.0 ? stepper.step(t, s, lo) : s;
      const State after = stepper.step(t, s, hi);

      ImpactEvent e;
      e.time = t + lo;
      e.point = before.x;
      e.v_pre = before.v;
      e.v_post = before.v;
      for (int i = 0; i < n; ++i) {
        const double lower = box.lower()[i];
        const double upper = box.upper()[i];
        const double reach = std::abs(after.v[i]) * tol;
        const bool low_hit = after.x[i] <= lower + reach && after.v[i] < 0.0;
        const bool high_hit = after.x[i] >= upper - reach && after.v[i] > 0.0;
        if (low_hit || high_hit) {
          e.axes.push_back(i);
          e.point[i] = low_hit ? lower : upper;
          e.v_post[i] = -e.v_pre[i];
        }
      }
      if (e.axes.empty()) {
        // Exit detected without an identifiable face: snap to the box.
        e.point = e.point.cwiseMax(box.lower()).cwiseMin(box.upper());
      }
      s = State{e.point, e.v_post};
      t = e.time;
      out.t.push_back(t);
      out.x.push_back(e.point);
      out.v.push_back(e.v_post);
      out.events.push_back(std::move(e));
      if (++events > kMaxEventsPerStep) {
        std::ostringstream os;
        os << "more than " << kMaxEventsPerStep << " boundary events in the step ending at t = "
           << t_end;
        throw Error(ErrorKind::StuckAtBoundary, os.str());
      }
    }
    out.t.push_back(t);
    out.x.push_back(s.x);
    out.v.push_back(s.v);
  }
  out.x_final = s.x;
  out.v_final = s.v;
  return out;
}

CrosscheckReport crosscheck(const BilliardSolution& sol, const ForceField& field,
                            const BoxDomain& box, const SimulationOptions& options) {
  const ShootResult shot =
      simulate(field, box, sol.A, sol.initial_velocity(), sol.horizon, options);
  CrosscheckReport r;
  r.terminal_gap = (shot.x_final - sol.B).norm();
  r.sim_impacts = static_cast<int>(shot.events.size());
  r.sol_impacts = sol.impact_count();
  for (const auto& e : shot.events) r.sim_multiplicity += e.multiplicity();
  r.sol_multiplicity = sol.total_multiplicity();
  r.counts_match = r.sim_impacts == r.sol_impacts && r.sim_multiplicity == r.sol_multiplicity;
  if (r.sim_impacts == r.sol_impacts) {
    for (std::size_t q = 0; q < shot.events.size(); ++q) {
      r.max_impact_time_gap =
          std::max(r.max_impact_time_gap, std::abs(shot.events[q].time - sol.impacts[q].time));
    }
  } else {
    r.max_impact_time_gap = std::numeric_limits<double>::infinity();
  }
  r.pass = r.counts_match && r.terminal_gap <= options.terminal_tol * box.diameter();
  return r;
}

}  // namespace bbvp
