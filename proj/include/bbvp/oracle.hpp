#pragma once

#include <vector>

#include "bbvp/billiard.hpp"
#include "bbvp/events.hpp"
#include "bbvp/forces.hpp"

namespace bbvp {

// Forward simulation of the impact system. Nothing here touches the
// unfolding machinery: it consumes the force, the box and initial data only.

struct SimulationOptions {
  int step_count = 8192;
  /// Event localization tolerance, relative to T.
  double event_tol = 1e-12;
  /// Accepted terminal gap in cross-checks, relative to diam(K).
  double terminal_tol = 1e-4;
};

struct ShootResult {
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> v;
  std::vector<ImpactEvent> events;
  Vec x_final;
  Vec v_final;
};

/// Classical RK4 with fixed steps T/step_count. A step leaving the box is
/// bisected down to the first face crossing, the crossing components are
/// reflected and integration resumes. Components crossing inside one
/// event_tol window reflect together. Throws StuckAtBoundary after more
/// than 1000 events in one step, BadInput for a non-interior start.
ShootResult simulate(const ForceField& field, const BoxDomain& box, const Vec& x0,
                     const Vec& v0, double horizon, const SimulationOptions& options);

struct CrosscheckReport {
  double terminal_gap = 0.0;
  double max_impact_time_gap = 0.0;
  int sim_impacts = 0;
  int sol_impacts = 0;
  int sim_multiplicity = 0;
  int sol_multiplicity = 0;
  bool counts_match = false;
  /// counts_match and terminal_gap <= terminal_tol * diam(K).
  bool pass = false;
};

/// Shoots from (A, x'(0+)) of `sol` and compares with the folded solution.
CrosscheckReport crosscheck(const BilliardSolution& sol, const ForceField& field,
                            const BoxDomain& box, const SimulationOptions& options);

}  // namespace bbvp
