#pragma once

#include <vector>

#include "bbvp/bvp.hpp"
#include "bbvp/events.hpp"
#include "bbvp/forces.hpp"

namespace bbvp {

/// Crossing times of each axis with the lines z_i = k c_i, sorted.
/// Throws MonotonicityLost when an axis turns back.
std::vector<std::vector<double>> locate_crossings(const UnfoldedTrajectory& z,
                                                  const BoxDomain& domain);

/// |floor(z0_i / c_i) - floor(zT_i / c_i)| for each axis. Throws GridLine.
std::vector<long> crossing_counts(const BoxDomain& domain, const Vec& z0,
                                  const Vec& zT);
/// Sum of crossing_counts: impacts up to multiplicity.
long impact_count_formula(const BoxDomain& domain, const Vec& z0, const Vec& zT);

struct Sample {
  double t = 0.0;
  Vec x;
  Vec v;
  /// Unfolded source of the sample (empty when read back from CSV).
  Vec z;
  Vec zdot;
};

/// Smooth arc between consecutive impacts. The first and last samples sit
/// at the bounding impact (or at 0 / T) with one-sided velocities.
struct Segment {
  std::vector<Sample> samples;
};

struct BilliardSolution {
  std::vector<Segment> segments;
  std::vector<ImpactEvent> impacts;
  Vec A;
  Vec B;
  /// Add to positions to report in original box coordinates.
  Vec shift;
  double horizon = 0.0;

  int impact_count() const { return static_cast<int>(impacts.size()); }
  int total_multiplicity() const;
  Vec initial_velocity() const { return segments.front().samples.front().v; }
};

/// x = fold(z) with exact impact events. Crossings of different axes within
/// merge_tol are merged into one multi-axis impact.
/// Throws EndpointOnGridLine, MonotonicityLost.
BilliardSolution fold_trajectory(const UnfoldedTrajectory& z,
                                 const BoxDomain& domain, double merge_tol);

struct VerifyTolerances {
  double ode = 1e-3;
  double reflection = 1e-12;
  double boundary = 1e-9;
};

struct VerifyReport {
  /// max |x'' - f(t, x)| by second differences over uniform interior triples.
  double ode_residual = 0.0;
  int ode_samples = 0;
  double reflection_violation = 0.0;
  /// max | |v_post| - |v_pre| | / |v_pre|.
  double energy_violation = 0.0;
  double start_error = 0.0;
  double end_error = 0.0;
  bool inside_box = true;
  /// No sample off an impact touches the boundary, at sample resolution.
  bool boundary_only_at_impacts = true;
  double resolution = 0.0;
  bool pass = false;
};

/// `field` and `domain` are the normalized ones the solution lives in.
VerifyReport verify_solution(const BilliardSolution& sol, const ForceField& field,
                             const BoxDomain& domain, const VerifyTolerances& tol);

}  // namespace bbvp
