#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "bbvp/domain.hpp"
#include "bbvp/forces.hpp"
#include "bbvp/multiplicity.hpp"

namespace bbvp {

/// Problem description as read from an INI-style config file:
///
///   [domain]     lower, upper                      (vectors)
///   [endpoints]  A, B (original coordinates), T
///   [field]      name, bound (optional), field parameters
///   [solver]     N, tol_fp, max_iter, damping, anderson_depth,
///                m_schedule, tol_residual, limit_level,
///                resolve_crossings, early_stop
///   [billiard]   merge_tol
///   [verify]     tol_ode, tol_reflection, tol_boundary
///   [oracle]     step_count, event_tol, enabled
///   [multiplicity] p, jobs
struct ProblemConfig {
  BoxDomain domain;
  Vec A;
  Vec B;
  double horizon = 1.0;
  FieldSpec field;
  BranchOptions options;
  std::optional<int> p;
  int jobs = 1;
  /// Verbatim source, echoed into reports.
  std::string text;
};

/// Throws ErrorKind::BadInput with the offending key in the message.
ProblemConfig parse_config(const std::string& text);
ProblemConfig load_config(const std::filesystem::path& path);

/// Uneven table V = x y exp(-x^2 - y^2) on [-2, 2]^2 with g = 9.81 and the
/// analytic bound g/2.
std::string example_table_config();

/// Normalized problem ready for the solver.
struct Problem {
  ProblemConfig config;
  Normalized norm;
  ForceField field;  // in normalized coordinates
};

Problem make_problem(const ProblemConfig& config);

}  // namespace bbvp
