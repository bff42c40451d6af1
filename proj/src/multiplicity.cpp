#include "bbvp/multiplicity.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "bbvp/error.hpp"

namespace bbvp {

int min_p(double horizon, double mbar, const Vec& edges) {
  if (!(mbar >= 0.0) || !std::isfinite(mbar)) {
    throw Error(ErrorKind::BadInput, "mbar must be finite and >= 0");
  }
  double ratio = 0.0;
  for (Eigen::Index i = 0; i < edges.size(); ++i) {
    ratio = std::max(ratio, horizon * mbar / edges[i]);
  }
  // floor(r) + 2 is the least integer strictly above r + 1.
  return static_cast<int>(std::floor(ratio)) + 2;
}

int min_p(const BoxDomain& domain, const ForceField& field) {
  return min_p(field.horizon(), field.bound_integral(), domain.edges());
}

std::string BranchSpec::label() const {
  std::string s;
  for (int x : xi) s += x > 0 ? '+' : '-';
  return s;
}

BranchSpec make_branch(const BoxDomain& domain, const Vec& A, const Vec& B, int p,
                       const std::vector<int>& xi) {
  if (p < 1) throw Error(ErrorKind::BadInput, "impact budget p must be >= 1");
  if (!domain.strictly_interior(A) || !domain.strictly_interior(B)) {
    throw Error(ErrorKind::BadInput, "A and B must lie strictly inside the box");
  }
  const int n = domain.dim();
  if (static_cast<int>(xi.size()) != n) {
    throw Error(ErrorKind::BadInput, "sign vector has wrong dimension");
  }
  BranchSpec b;
  b.p = p;
  b.xi = xi;
  b.u = Vec(n);
  for (int i = 0; i < n; ++i) {
    if (xi[i] != 1 && xi[i] != -1) {
      throw Error(ErrorKind::BadInput, "sign vector entries must be +1 or -1");
    }
    b.u[i] = xi[i] * domain.edge(i);
  }
  b.zeta = (p % 2 == 0) ? B : Vec(domain.edges() - B);
  b.target = p * b.u + b.zeta;
  b.source = A;
  return b;
}

std::vector<BranchSpec> branch_targets(const BoxDomain& domain, const Vec& A,
                                       const Vec& B, int p) {
  const int n = domain.dim();
  std::vector<BranchSpec> out;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> xi(n);
    for (int i = 0; i < n; ++i) xi[i] = (mask >> (n - 1 - i)) & 1u ? 1 : -1;
    out.push_back(make_branch(domain, A, B, p, xi));
  }
  return out;
}

const char* to_string(BranchStatus status) {
  switch (status) {
    case BranchStatus::Converged: return "converged";
    case BranchStatus::NotConverged: return "not_converged";
    case BranchStatus::MonotonicityLost: return "monotonicity_lost";
    case BranchStatus::PreconditionViolated: return "precondition_violated";
    case BranchStatus::InvariantViolation: return "invariant_violation";
  }
  return "unknown";
}

BranchOutcome solve_branch(const ForceField& field, const BoxDomain& domain,
                           const Vec& A, const Vec& B, const BranchSpec& spec,
                           const BranchOptions& options) {
  BranchOutcome out;
  out.spec = spec;
  try {
    out.continuation =
        continuation_solve(field, domain, spec.source, spec.target, options.solver);
    BilliardSolution sol = fold_trajectory(out.continuation->trajectory, domain,
                                           options.merge_tol * field.horizon());
    sol.A = A;
    sol.B = B;
    out.verify = verify_solution(sol, field, domain, options.verify);
    if (options.run_oracle) out.crosscheck = crosscheck(sol, field, domain, options.oracle);
    out.solution = std::move(sol);

    std::ostringstream why;
    const int n = domain.dim();
    if (!out.continuation->residual_ok) {
      why << "integrated-equation residual " << out.continuation->residual.max_residual
          << " exceeds tol_residual; ";
    }
    if (out.continuation->bound_violations > 0) why << "a-priori bound violated; ";
    if (!out.verify->pass) why << "solution verification failed; ";
    if (out.crosscheck && !out.crosscheck->pass) why << "forward simulation disagrees; ";
    if (out.solution->total_multiplicity() != n * spec.p) {
      why << "total multiplicity " << out.solution->total_multiplicity() << " != n*p; ";
    }
    if (out.solution->impact_count() < spec.p) why << "fewer than p impacts; ";
    out.message = why.str();
    out.status = out.message.empty() ? BranchStatus::Converged : BranchStatus::InvariantViolation;
  } catch (const NotConverged& e) {
    out.status = BranchStatus::NotConverged;
    out.message = e.what();
  } catch (const Error& e) {
    out.message = e.what();
    switch (e.kind()) {
      case ErrorKind::MonotonicityLost: out.status = BranchStatus::MonotonicityLost; break;
      case ErrorKind::PreconditionViolated: out.status = BranchStatus::PreconditionViolated; break;
      default: out.status = BranchStatus::InvariantViolation; break;
    }
  }
  return out;
}

double sup_distance(const UnfoldedTrajectory& a, const UnfoldedTrajectory& b) {
  if (a.values.rows() != b.values.rows()) {
    throw Error(ErrorKind::BadInput, "trajectories live on different grids");
  }
  return (a.values - b.values).rowwise().norm().maxCoeff();
}

int MultiplicityCertificate::converged() const {
  int count = 0;
  for (const auto& b : branches) count += b.status == BranchStatus::Converged;
  return count;
}

MultiplicityCertificate enumerate_solutions(const BoxDomain& domain, const ForceField& field,
                                            const Vec& A, const Vec& B,
                                            const EnumerateOptions& options) {
  MultiplicityCertificate cert;
  cert.min_p = min_p(domain, field);
  cert.p = options.p.value_or(cert.min_p);
  if (cert.p < cert.min_p) {
    std::ostringstream os;
    os << "p = " << cert.p << " is below the admissible minimum " << cert.min_p;
    throw Error(ErrorKind::BadInput, os.str());
  }
  const auto specs = branch_targets(domain, A, B, cert.p);
  cert.branches.resize(specs.size());

  // Each worker owns a fixed stride of branches, so the result does not
  // depend on scheduling.
  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(specs.size())));
  auto work = [&](int worker) {
    for (std::size_t q = worker; q < specs.size(); q += jobs) {
      cert.branches[q] = solve_branch(field, domain, A, B, specs[q], options.branch);
    }
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }

  const auto m = static_cast<Eigen::Index>(specs.size());
  cert.distinctness = Eigen::MatrixXd::Constant(m, m, std::numeric_limits<double>::quiet_NaN());
  cert.distinct_threshold = 0.5 * domain.min_edge();
  cert.distinct_ok = true;
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto& ca = cert.branches[a].continuation;
    if (!ca) continue;
    cert.distinctness(a, a) = 0.0;
    for (Eigen::Index b = a + 1; b < m; ++b) {
      const auto& cb = cert.branches[b].continuation;
      if (!cb) continue;
      const double d = sup_distance(ca->trajectory, cb->trajectory);
      cert.distinctness(a, b) = cert.distinctness(b, a) = d;
      if (!(d > cert.distinct_threshold)) cert.distinct_ok = false;
    }
  }
  cert.partial = cert.converged() != static_cast<int>(specs.size());
  return cert;
}

}  // namespace bbvp
