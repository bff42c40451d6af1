#pragma once

#include <optional>
#include <vector>

#include "bbvp/domain.hpp"
#include "bbvp/forces.hpp"

namespace bbvp {

/// Uniform grid t_k = k T / N, k = 0..N, with N even.
class TimeGrid {
 public:
  TimeGrid(double horizon, int intervals);

  double horizon() const { return T_; }
  int intervals() const { return N_; }
  int nodes() const { return N_ + 1; }
  double step() const { return T_ / N_; }
  double t(int k) const { return k == N_ ? T_ : T_ * k / N_; }

 private:
  double T_;
  int N_;
};

/// Candidate solution of the unfolded equation: node values and node
/// derivatives, one row per node. Off-node evaluation uses cubic Hermite
/// interpolation of the node data.
struct UnfoldedTrajectory {
  TimeGrid grid;
  Eigen::MatrixXd values;  // (N+1) x n
  Eigen::MatrixXd derivs;  // (N+1) x n
  Vec start;
  Vec target;

  int dim() const { return static_cast<int>(values.cols()); }
  Vec value(int k) const { return values.row(k).transpose(); }
  Vec deriv(int k) const { return derivs.row(k).transpose(); }

  /// Index j with t_j <= s <= t_{j+1}.
  int interval_of(double s) const;
  double component_at(int i, double s) const;
  double component_velocity_at(int i, double s) const;
  Vec position_at(double s) const;
  Vec velocity_at(double s) const;
};

/// Uniform motion from `start` to `target`.
UnfoldedTrajectory straight_line(const TimeGrid& grid, const Vec& start,
                                 const Vec& target);

/// Regularization level: a ramp index m >= 1, or empty for the
/// unregularized right-hand side f* (the m -> infinity limit).
using Level = std::optional<int>;

struct SolverConfig {
  int intervals = 4096;
  double tol_fp = 1e-10;
  int max_iter = 500;
  double damping = 0.5;
  int anderson_depth = 3;
  std::vector<int> m_schedule{4, 8, 16, 32, 64, 128};
  double tol_residual = 1e-6;
  /// Finish the continuation with a solve against f* itself.
  bool limit_level = true;
  /// Split quadrature cells at grid-line crossings and ramp edges so that
  /// the piecewise-smooth integrand is integrated piece by piece.
  bool resolve_crossings = true;
  /// Stop the m sweep early when successive levels differ by <= tol_fp.
  bool early_stop = false;

  void validate() const;
};

/// Green function of x'' = 0, x(0) = x(T) = 0.
double green(double t, double s, double T);
/// d/dt of green(); the value at t == s is the mean of both branches.
double green_dt(double t, double s, double T);

/// One application of the integral operator
///   (T_m y)(t) = (t/T) z_T + ((T-t)/T) A + int_0^T G(t,s) g*_m(s, y(s)) ds
/// with node derivatives from the t-derivative of the kernel.
UnfoldedTrajectory apply_operator(const ForceField& field,
                                  const BoxDomain& domain,
                                  const UnfoldedTrajectory& y, Level level,
                                  bool resolve_crossings = true);

struct IterationStats {
  int iterations = 0;
  double residual = 0.0;
  /// Iterates that broke the a-priori value or velocity bound.
  int bound_violations = 0;
  /// Extrapolated steps rejected in favour of the plain damped step.
  int anderson_rejections = 0;
  double max_value_norm = 0.0;
  double max_velocity_deviation = 0.0;
};

struct RegularizedSolve {
  UnfoldedTrajectory trajectory;
  IterationStats stats;
};

/// A-priori bounds every iterate must satisfy.
struct AprioriBounds {
  double value;     // ||A|| + ||z_T|| + T mbar
  double velocity;  // mbar
};
AprioriBounds apriori_bounds(const ForceField& field, const Vec& start,
                             const Vec& target);

/// Damped (optionally Anderson-accelerated) fixed-point iteration for the
/// regularized unfolded problem. Throws NotConverged.
RegularizedSolve solve_regularized(const ForceField& field,
                                   const BoxDomain& domain, const Vec& start,
                                   const Vec& target, Level level,
                                   const SolverConfig& config,
                                   const UnfoldedTrajectory* warm_start = nullptr);

struct LevelRecord {
  Level level;
  IterationStats stats;
  /// sup-norm distance to the previous level's solution (0 for the first).
  double change = 0.0;
};

/// |z'(s2) - z'(s1) - int_{s1}^{s2} f*(s, z(s)) ds| over node pairs inside
/// one open cell-interval, nodes within 2h of a crossing excluded.
struct IntegratedResidual {
  double max_residual = 0.0;
  int windows = 0;
  int excluded_nodes = 0;
};

IntegratedResidual integrated_residual(const ForceField& field,
                                       const BoxDomain& domain,
                                       const UnfoldedTrajectory& z);

struct ContinuationResult {
  UnfoldedTrajectory trajectory;
  std::vector<LevelRecord> levels;
  IntegratedResidual residual;
  bool residual_ok = false;
  int bound_violations = 0;
  /// The early-stop rule on successive-level changes is heuristic.
  bool stopped_early = false;
};

/// Throws PreconditionViolated unless |z_T,i - a_i| > T mbar for all i.
void check_monotone_hypothesis(const ForceField& field, const Vec& start,
                               const Vec& target);

/// Warm-started sweep over the m schedule, optionally finished by an
/// unregularized solve, followed by the monotonicity and integrated-residual
/// checks. Throws PreconditionViolated, NotConverged or MonotonicityLost.
ContinuationResult continuation_solve(const ForceField& field,
                                      const BoxDomain& domain,
                                      const Vec& start, const Vec& target,
                                      const SolverConfig& config);

/// Richardson estimate C h^2 of the discretization error at N, from the
/// nodewise difference between solves at N and 2N.
struct RichardsonEstimate {
  double value_error = 0.0;
  double velocity_error = 0.0;
};
RichardsonEstimate richardson_error(const UnfoldedTrajectory& coarse,
                                    const UnfoldedTrajectory& fine);

/// Max over nodes of ||z'(t_k) - (z_T - A)/T||.
double max_velocity_deviation(const UnfoldedTrajectory& z);
double max_value_norm(const UnfoldedTrajectory& z);

}  // namespace bbvp
