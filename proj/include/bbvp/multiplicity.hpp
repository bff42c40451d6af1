#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bbvp/billiard.hpp"
#include "bbvp/bvp.hpp"
#include "bbvp/oracle.hpp"

namespace bbvp {

/// Smallest integer p with p > max_i T mbar / c_i + 1.
int min_p(double horizon, double mbar, const Vec& edges);
int min_p(const BoxDomain& domain, const ForceField& field);

/// One choice of mosaic vertex u = (xi_1 c_1, ..., xi_n c_n) and the
/// unfolded target z_T = p u + zeta, where zeta is B for even p and c - B
/// for odd p, so that fold(z_T) = B.
struct BranchSpec {
  int p = 0;
  std::vector<int> xi;
  Vec u;
  Vec zeta;
  Vec target;
  Vec source;

  /// "+-+" style sign string.
  std::string label() const;
};

/// All 2^n branches in lexicographic order of xi (-1 before +1, axis 1
/// most significant). Throws BadInput for non-interior A, B or p < 1.
std::vector<BranchSpec> branch_targets(const BoxDomain& domain, const Vec& A,
                                       const Vec& B, int p);
BranchSpec make_branch(const BoxDomain& domain, const Vec& A, const Vec& B, int p,
                       const std::vector<int>& xi);

struct BranchOptions {
  SolverConfig solver;
  double merge_tol = 1e-8;  // relative to T
  VerifyTolerances verify;
  SimulationOptions oracle;
  bool run_oracle = true;
};

enum class BranchStatus { Converged, NotConverged, MonotonicityLost, PreconditionViolated, InvariantViolation };
const char* to_string(BranchStatus status);

struct BranchOutcome {
  BranchSpec spec;
  BranchStatus status = BranchStatus::NotConverged;
  std::string message;
  std::optional<ContinuationResult> continuation;
  std::optional<BilliardSolution> solution;
  std::optional<VerifyReport> verify;
  std::optional<CrosscheckReport> crosscheck;
};

/// Continuation solve, fold-back, verification and (optionally) the
/// forward cross-check for one branch. Solver failures are captured in the
/// outcome rather than thrown.
BranchOutcome solve_branch(const ForceField& field, const BoxDomain& domain,
                           const Vec& A, const Vec& B, const BranchSpec& spec,
                           const BranchOptions& options);

struct EnumerateOptions {
  std::optional<int> p;
  BranchOptions branch;
  int jobs = 1;
};

struct MultiplicityCertificate {
  int p = 0;
  int min_p = 0;
  std::vector<BranchOutcome> branches;
  /// sup_t ||z_a(t) - z_b(t)|| between converged branches (NaN otherwise).
  Eigen::MatrixXd distinctness;
  double distinct_threshold = 0.0;
  bool distinct_ok = false;
  bool partial = false;

  int converged() const;
};

/// Solves all 2^n branches for impact budget p (min_p when absent).
/// `domain`, `field`, `A`, `B` are normalized. Throws BadInput if p < min_p.
MultiplicityCertificate enumerate_solutions(const BoxDomain& domain, const ForceField& field,
                                            const Vec& A, const Vec& B,
                                            const EnumerateOptions& options);

/// sup-norm distance between two unfolded trajectories on the same grid.
double sup_distance(const UnfoldedTrajectory& a, const UnfoldedTrajectory& b);

}  // namespace bbvp
