#include "bbvp/bvp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bbvp/error.hpp"

namespace bbvp {

TimeGrid::TimeGrid(double horizon, int intervals) : T_(horizon), N_(intervals) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorKind::BadInput, "horizon T must be finite and > 0");
  }
  if (intervals < 2 || intervals % 2 != 0) {
    throw Error(ErrorKind::BadInput, "grid needs an even number N >= 2 of intervals");
  }
}

// ---------------------------------------------------------------------------
// Hermite interpolation of node data

int UnfoldedTrajectory::interval_of(double s) const {
  const int N = grid.intervals();
  const int j = static_cast<int>(std::floor(s / grid.step()));
  return std::clamp(j, 0, N - 1);
}

double UnfoldedTrajectory::component_at(int i, double s) const {
  const int j = interval_of(s);
  const double h = grid.step();
  const double tau = (s - grid.t(j)) / h;
  const double t2 = tau * tau;
  const double t3 = t2 * tau;
  return (2 * t3 - 3 * t2 + 1) * values(j, i) + (t3 - 2 * t2 + tau) * h * derivs(j, i) +
         (-2 * t3 + 3 * t2) * values(j + 1, i) + (t3 - t2) * h * derivs(j + 1, i);
}

double UnfoldedTrajectory::component_velocity_at(int i, double s) const {
  const int j = interval_of(s);
  const double h = grid.step();
  const double tau = (s - grid.t(j)) / h;
  const double t2 = tau * tau;
  return ((6 * t2 - 6 * tau) * values(j, i) + (-6 * t2 + 6 * tau) * values(j + 1, i)) / h +
         (3 * t2 - 4 * tau + 1) * derivs(j, i) + (3 * t2 - 2 * tau) * derivs(j + 1, i);
}

Vec UnfoldedTrajectory::position_at(double s) const {
  Vec out(dim());
  for (int i = 0; i < dim(); ++i) out[i] = component_at(i, s);
  return out;
}

Vec UnfoldedTrajectory::velocity_at(double s) const {
  Vec out(dim());
  for (int i = 0; i < dim(); ++i) out[i] = component_velocity_at(i, s);
  return out;
}

UnfoldedTrajectory straight_line(const TimeGrid& grid, const Vec& start,
                                 const Vec& target) {
  const int n = static_cast<int>(start.size());
  const double T = grid.horizon();
  UnfoldedTrajectory z{grid, Eigen::MatrixXd(grid.nodes(), n),
                       Eigen::MatrixXd(grid.nodes(), n), start, target};
  const Vec slope = (target - start) / T;
  for (int k = 0; k < grid.nodes(); ++k) {
    const double t = grid.t(k);
    z.values.row(k) = ((t / T) * target + ((T - t) / T) * start).transpose();
    z.derivs.row(k) = slope.transpose();
  }
  z.values.row(0) = start.transpose();
  z.values.row(grid.intervals()) = target.transpose();
  return z;
}

void SolverConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::BadInput, what); };
  if (intervals < 2 || intervals % 2 != 0) bad("solver N must be even and >= 2");
  if (!(tol_fp > 0.0)) bad("tol_fp must be > 0");
  if (max_iter < 1) bad("max_iter must be >= 1");
  if (!(damping > 0.0 && damping <= 1.0)) bad("damping must lie in (0, 1]");
  if (anderson_depth < 0) bad("anderson_depth must be >= 0");
  if (!(tol_residual > 0.0)) bad("tol_residual must be > 0");
  for (std::size_t k = 0; k < m_schedule.size(); ++k) {
    if (m_schedule[k] < 1) bad("m_schedule entries must be >= 1");
    if (k > 0 && m_schedule[k] <= m_schedule[k - 1]) {
      bad("m_schedule must be strictly increasing");
    }
  }
  if (m_schedule.empty() && !limit_level) bad("nothing to solve: empty m_schedule");
}

double green(double t, double s, double T) {
  return t <= s ? t * (s - T) / T : s * (t - T) / T;
}

double green_dt(double t, double s, double T) {
  if (t < s) return (s - T) / T;
  if (t > s) return s / T;
  return 0.5 * ((s - T) / T + s / T);
}

// ---------------------------------------------------------------------------
// Kernel quadrature

namespace {

/// Per-interval integrals of phi(s) and s * phi(s), phi = g*_level(s, y(s)).
struct IntervalIntegrals {
  Eigen::MatrixXd plain;     // N x n
  Eigen::MatrixXd weighted;  // N x n
};

std::vector<long> cells_of(const BoxDomain& domain, const Vec& z) {
  std::vector<long> cells(z.size());
  for (int i = 0; i < domain.dim(); ++i) cells[i] = domain.raw_cell(i, z[i]);
  return cells;
}

bool any_on_grid(const BoxDomain& domain, const Vec& z) {
  for (int i = 0; i < domain.dim(); ++i) {
    if (domain.on_grid_line(i, z[i])) return true;
  }
  return false;
}

double bisect_level(const UnfoldedTrajectory& y, int i, double level, double a,
                    double b) {
  double fa = y.component_at(i, a) - level;
  for (int it = 0; it < 60 && b - a > 1e-15 * y.grid.horizon(); ++it) {
    const double mid = 0.5 * (a + b);
    const double fm = y.component_at(i, mid) - level;
    if (fm == 0.0) return mid;
    if ((fa < 0.0) == (fm < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

/// Times inside (t_j, t_{j+1}) where some component of y meets a grid line
/// or, for finite m, a ramp edge c/2m away from one.
void collect_breakpoints(const UnfoldedTrajectory& y, const BoxDomain& domain,
                         int j, Level level, std::vector<double>& out) {
  out.clear();
  const double a = y.grid.t(j);
  const double b = y.grid.t(j + 1);
  for (int i = 0; i < y.dim(); ++i) {
    const double z0 = y.values(j, i);
    const double z1 = y.values(j + 1, i);
    const double lo = std::min(z0, z1);
    const double hi = std::max(z0, z1);
    const double c = domain.edge(i);
    const double ramp = level ? c / (2.0 * *level) : 0.0;
    const long k_lo = static_cast<long>(std::floor((lo - ramp) / c));
    const long k_hi = static_cast<long>(std::ceil((hi + ramp) / c));
    for (long k = k_lo; k <= k_hi; ++k) {
      const double line = static_cast<double>(k) * c;
      const double offsets[3] = {-ramp, 0.0, ramp};
      for (int q = 0; q < 3; ++q) {
        if (!level && q != 1) continue;
        const double target = line + offsets[q];
        if (target > lo && target < hi) {
          out.push_back(bisect_level(y, i, target, a, b));
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double u, double v) { return std::abs(u - v) <= 0.0; }),
            out.end());
}

IntervalIntegrals integrate_intervals(const ForceField& field,
                                      const BoxDomain& domain,
                                      const UnfoldedTrajectory& y, Level level,
                                      bool resolve) {
  const int N = y.grid.intervals();
  const int n = y.dim();
  IntervalIntegrals out{Eigen::MatrixXd(N, n), Eigen::MatrixXd(N, n)};

  // Node samples, valid for intervals without interior breakpoints.
  std::vector<Vec> phi(N + 1);
  std::vector<char> on_grid(N + 1, 0);
  for (int k = 0; k <= N; ++k) {
    const double t = y.grid.t(k);
    const Vec z = y.value(k);
    if (!resolve) {
      phi[k] = level ? g_star(field, domain, t, z, *level)
                     : extend_f_star(field, domain, t, z);
    } else {
      on_grid[k] = any_on_grid(domain, z);
      phi[k] = g_star_in_cells(field, domain, t, z, cells_of(domain, z), level);
    }
  }

  std::vector<double> breaks;
  std::vector<double> knots;
  for (int j = 0; j < N; ++j) {
    const double a = y.grid.t(j);
    const double b = y.grid.t(j + 1);
    if (resolve) collect_breakpoints(y, domain, j, level, breaks);
    if (!resolve || (breaks.empty() && !on_grid[j] && !on_grid[j + 1])) {
      const double w = 0.5 * (b - a);
      out.plain.row(j) = (w * (phi[j] + phi[j + 1])).transpose();
      out.weighted.row(j) = (w * (a * phi[j] + b * phi[j + 1])).transpose();
      continue;
    }
    knots.clear();
    knots.push_back(a);
    knots.insert(knots.end(), breaks.begin(), breaks.end());
    knots.push_back(b);
    Vec plain = Vec::Zero(n);
    Vec weighted = Vec::Zero(n);
    for (std::size_t q = 0; q + 1 < knots.size(); ++q) {
      const double s0 = knots[q];
      const double s1 = knots[q + 1];
      if (!(s1 > s0)) continue;
      const Vec z0 = (q == 0) ? y.value(j) : y.position_at(s0);
      const Vec z1 = (q + 2 == knots.size()) ? y.value(j + 1) : y.position_at(s1);
      const auto cells = cells_of(domain, Vec(0.5 * (z0 + z1)));
      const Vec p0 = g_star_in_cells(field, domain, s0, z0, cells, level);
      const Vec p1 = g_star_in_cells(field, domain, s1, z1, cells, level);
      const double w = 0.5 * (s1 - s0);
      plain += w * (p0 + p1);
      weighted += w * (s0 * p0 + s1 * p1);
    }
    out.plain.row(j) = plain.transpose();
    out.weighted.row(j) = weighted.transpose();
  }
  return out;
}

}  // namespace

UnfoldedTrajectory apply_operator(const ForceField& field,
                                  const BoxDomain& domain,
                                  const UnfoldedTrajectory& y, Level level,
                                  bool resolve_crossings) {
  const int N = y.grid.intervals();
  const int n = y.dim();
  const double T = y.grid.horizon();
  const IntervalIntegrals I =
      integrate_intervals(field, domain, y, level, resolve_crossings);

  Eigen::MatrixXd P0 = Eigen::MatrixXd::Zero(N + 1, n);
  Eigen::MatrixXd P1 = Eigen::MatrixXd::Zero(N + 1, n);
  for (int k = 0; k < N; ++k) {
    P0.row(k + 1) = P0.row(k) + I.plain.row(k);
    P1.row(k + 1) = P1.row(k) + I.weighted.row(k);
  }

  UnfoldedTrajectory out{y.grid, Eigen::MatrixXd(N + 1, n),
                         Eigen::MatrixXd(N + 1, n), y.start, y.target};
  const Eigen::RowVectorXd A = y.start.transpose();
  const Eigen::RowVectorXd B = y.target.transpose();
  const Eigen::RowVectorXd slope = (B - A) / T;
  for (int k = 0; k <= N; ++k) {
    const double t = y.grid.t(k);
    // int_0^t s phi ds and int_t^T (s - T) phi ds
    const Eigen::RowVectorXd left = P1.row(k);
    const Eigen::RowVectorXd right =
        (P1.row(N) - P1.row(k)) - T * (P0.row(N) - P0.row(k));
    out.values.row(k) = (t / T) * B + ((T - t) / T) * A +
                        ((t - T) / T) * left + (t / T) * right;
    out.derivs.row(k) = slope + (left + right) / T;
  }
  out.values.row(0) = A;
  out.values.row(N) = B;
  return out;
}

AprioriBounds apriori_bounds(const ForceField& field, const Vec& start,
                             const Vec& target) {
  return {start.norm() + target.norm() + field.horizon() * field.bound_integral(),
          field.bound_integral()};
}

double max_velocity_deviation(const UnfoldedTrajectory& z) {
  const Eigen::RowVectorXd slope =
      ((z.target - z.start) / z.grid.horizon()).transpose();
  double worst = 0.0;
  for (int k = 0; k < z.grid.nodes(); ++k) {
    worst = std::max(worst, (z.derivs.row(k) - slope).norm());
  }
  return worst;
}

double max_value_norm(const UnfoldedTrajectory& z) {
  return z.values.rowwise().norm().maxCoeff();
}

// ---------------------------------------------------------------------------
// Fixed-point iteration

namespace {

Vec flatten(const UnfoldedTrajectory& z) {
  const Eigen::Index sz = z.values.size();
  Vec out(2 * sz);
  out.head(sz) = Eigen::Map<const Vec>(z.values.data(), sz);
  out.tail(sz) = Eigen::Map<const Vec>(z.derivs.data(), sz);
  return out;
}

void unflatten(const Vec& flat, UnfoldedTrajectory& z) {
  const Eigen::Index sz = z.values.size();
  Eigen::Map<Vec>(z.values.data(), sz) = flat.head(sz);
  Eigen::Map<Vec>(z.derivs.data(), sz) = flat.tail(sz);
  z.values.row(0) = z.start.transpose();
  z.values.row(z.grid.intervals()) = z.target.transpose();
}

bool within_bounds(const UnfoldedTrajectory& z, const AprioriBounds& bounds,
                   double* value_norm = nullptr, double* velocity_dev = nullptr) {
  const double vn = max_value_norm(z);
  const double vd = max_velocity_deviation(z);
  if (value_norm) *value_norm = vn;
  if (velocity_dev) *velocity_dev = vd;
  if (!std::isfinite(vn) || !std::isfinite(vd)) return false;
  // Slack covers rounding only; the bounds hold exactly for the discrete
  // operator.
  const double value_slack = 1e-12 * std::max(1.0, bounds.value);
  const double velocity_slack = 1e-12 * std::max(1.0, bounds.velocity + vd);
  return vn <= bounds.value + value_slack &&
         vd <= bounds.velocity + velocity_slack;
}

double value_residual(const UnfoldedTrajectory& x, const UnfoldedTrajectory& gx) {
  return (gx.values - x.values).cwiseAbs().maxCoeff();
}

void check_endpoints(const BoxDomain& domain, const Vec& start, const Vec& target) {
  if (start.size() != domain.dim() || target.size() != domain.dim()) {
    throw Error(ErrorKind::BadInput, "endpoint dimension does not match the box");
  }
  for (int i = 0; i < domain.dim(); ++i) {
    if (domain.on_grid_line(i, start[i]) || domain.on_grid_line(i, target[i])) {
      std::ostringstream os;
      os << "unfolded endpoint component " << i + 1 << " lies on a grid line";
      throw Error(ErrorKind::EndpointOnGridLine, os.str());
    }
  }
}

}  // namespace

RegularizedSolve solve_regularized(const ForceField& field,
                                   const BoxDomain& domain, const Vec& start,
                                   const Vec& target, Level level,
                                   const SolverConfig& config,
                                   const UnfoldedTrajectory* warm_start) {
  config.validate();
  check_endpoints(domain, start, target);
  if (field.dim() != domain.dim()) {
    throw Error(ErrorKind::BadInput, "force field dimension does not match the box");
  }
  const TimeGrid grid(field.horizon(), config.intervals);
  const AprioriBounds bounds = apriori_bounds(field, start, target);

  UnfoldedTrajectory x = straight_line(grid, start, target);
  if (warm_start) {
    if (warm_start->grid.intervals() != grid.intervals() ||
        warm_start->dim() != domain.dim()) {
      throw Error(ErrorKind::BadInput, "warm start is on a different grid");
    }
    x.values = warm_start->values;
    x.derivs = warm_start->derivs;
    x.values.row(0) = start.transpose();
    x.values.row(grid.intervals()) = target.transpose();
  }

  const double lambda = config.damping;
  const int depth = config.anderson_depth;
  std::vector<Vec> hist_f;
  std::vector<Vec> hist_g;
  IterationStats stats;
  UnfoldedTrajectory candidate = x;

  for (int it = 1; it <= config.max_iter; ++it) {
    double vn = 0.0;
    double vd = 0.0;
    if (!within_bounds(x, bounds, &vn, &vd)) ++stats.bound_violations;
    stats.max_value_norm = std::max(stats.max_value_norm, vn);
    stats.max_velocity_deviation = std::max(stats.max_velocity_deviation, vd);

    const UnfoldedTrajectory gx =
        apply_operator(field, domain, x, level, config.resolve_crossings);
    const double res = value_residual(x, gx);
    stats.iterations = it;
    stats.residual = res;
    if (!std::isfinite(res)) break;
    if (res <= config.tol_fp) return {x, stats};

    const Vec xf = flatten(x);
    const Vec gf = flatten(gx);
    const Vec ff = gf - xf;
    hist_f.push_back(ff);
    hist_g.push_back(gf);
    if (static_cast<int>(hist_f.size()) > depth + 1) {
      hist_f.erase(hist_f.begin());
      hist_g.erase(hist_g.begin());
    }

    bool accepted = false;
    if (depth > 0 && hist_f.size() >= 2) {
      const int mk = static_cast<int>(hist_f.size()) - 1;
      Eigen::MatrixXd dF(ff.size(), mk);
      Eigen::MatrixXd dG(ff.size(), mk);
      for (int q = 0; q < mk; ++q) {
        dF.col(q) = hist_f[q + 1] - hist_f[q];
        dG.col(q) = hist_g[q + 1] - hist_g[q];
      }
      const Vec gamma = dF.colPivHouseholderQr().solve(ff);
      if (gamma.allFinite()) {
        const Vec next = gf - dG * gamma - (1.0 - lambda) * (ff - dF * gamma);
        unflatten(next, candidate);
        if (within_bounds(candidate, bounds)) {
          accepted = true;
        } else {
          ++stats.anderson_rejections;
          hist_f.erase(hist_f.begin(), hist_f.end() - 1);
          hist_g.erase(hist_g.begin(), hist_g.end() - 1);
        }
      }
    }
    if (!accepted) unflatten(xf + lambda * ff, candidate);
    std::swap(x, candidate);
  }
  std::ostringstream os;
  os << "level " << (level ? std::to_string(*level) : std::string("inf"));
  throw NotConverged(stats.iterations, stats.residual, os.str());
}

// ---------------------------------------------------------------------------
// Continuation and limit checks

void check_monotone_hypothesis(const ForceField& field, const Vec& start,
                               const Vec& target) {
  const double threshold = field.horizon() * field.bound_integral();
  for (Eigen::Index i = 0; i < start.size(); ++i) {
    if (!(std::abs(target[i] - start[i]) > threshold)) {
      std::ostringstream os;
      os << "monotone-solution hypothesis fails on axis " << i + 1 << ": |z_T - A| = "
         << std::abs(target[i] - start[i]) << " is not > T*mbar = " << threshold;
      throw Error(ErrorKind::PreconditionViolated, os.str());
    }
  }
}

IntegratedResidual integrated_residual(const ForceField& field,
                                       const BoxDomain& domain,
                                       const UnfoldedTrajectory& z) {
  const int N = z.grid.intervals();
  const int n = z.dim();
  const double h = z.grid.step();
  const IntervalIntegrals I = integrate_intervals(field, domain, z, Level{}, true);

  // R_k = z'(t_k) - int_0^{t_k} f*; residual over a pair is R_k2 - R_k1.
  Eigen::MatrixXd R(N + 1, n);
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(n);
  for (int k = 0; k <= N; ++k) {
    if (k > 0) acc += I.plain.row(k - 1);
    R.row(k) = z.derivs.row(k) - acc;
  }

  std::vector<double> crossings;
  for (int i = 0; i < n; ++i) {
    const double c = domain.edge(i);
    for (int k = 0; k < N; ++k) {
      const double z0 = z.values(k, i);
      const double z1 = z.values(k + 1, i);
      if (domain.on_grid_line(i, z0)) crossings.push_back(z.grid.t(k));
      const double lo = std::min(z0, z1);
      const double hi = std::max(z0, z1);
      for (long line = static_cast<long>(std::floor(lo / c)) + 1;
           static_cast<double>(line) * c < hi; ++line) {
        const double frac = (static_cast<double>(line) * c - z0) / (z1 - z0);
        crossings.push_back(z.grid.t(k) + frac * h);
      }
    }
  }
  std::sort(crossings.begin(), crossings.end());

  IntegratedResidual out;
  int region = -1;
  Eigen::RowVectorXd lo_r(n);
  Eigen::RowVectorXd hi_r(n);
  int count = 0;
  auto flush = [&] {
    if (count >= 2) {
      out.max_residual = std::max(out.max_residual, (hi_r - lo_r).maxCoeff());
    }
    if (count >= 1) ++out.windows;
    count = 0;
  };
  std::size_t next = 0;
  int passed = 0;
  for (int k = 0; k <= N; ++k) {
    const double t = z.grid.t(k);
    while (next < crossings.size() && crossings[next] < t) {
      ++next;
      ++passed;
    }
    const double reach = 2.0 * h * (1.0 + 1e-12);
    const auto near = std::lower_bound(crossings.begin(), crossings.end(), t - reach);
    if (near != crossings.end() && *near <= t + reach) {
      ++out.excluded_nodes;
      continue;
    }
    if (passed != region) {
      flush();
      region = passed;
    }
    if (count == 0) {
      lo_r = R.row(k);
      hi_r = R.row(k);
    } else {
      lo_r = lo_r.cwiseMin(R.row(k));
      hi_r = hi_r.cwiseMax(R.row(k));
    }
    ++count;
  }
  flush();
  return out;
}

ContinuationResult continuation_solve(const ForceField& field,
                                      const BoxDomain& domain,
                                      const Vec& start, const Vec& target,
                                      const SolverConfig& config) {
  config.validate();
  check_monotone_hypothesis(field, start, target);

  std::vector<Level> levels(config.m_schedule.begin(), config.m_schedule.end());
  ContinuationResult result{straight_line(TimeGrid(field.horizon(), config.intervals),
                                          start, target),
                            {}, {}, false, 0, false};
  const UnfoldedTrajectory* warm = nullptr;
  for (std::size_t q = 0; q < levels.size(); ++q) {
    RegularizedSolve solve =
        solve_regularized(field, domain, start, target, levels[q], config, warm);
    LevelRecord record{levels[q], solve.stats, 0.0};
    if (warm) record.change = (solve.trajectory.values - warm->values).cwiseAbs().maxCoeff();
    result.bound_violations += solve.stats.bound_violations;
    result.levels.push_back(record);
    result.trajectory = std::move(solve.trajectory);
    warm = &result.trajectory;
    if (config.early_stop && q > 0 && record.change <= config.tol_fp) {
      result.stopped_early = q + 1 < levels.size();
      break;
    }
  }
  if (config.limit_level) {
    RegularizedSolve solve =
        solve_regularized(field, domain, start, target, Level{}, config, warm);
    LevelRecord record{Level{}, solve.stats, 0.0};
    if (warm) record.change = (solve.trajectory.values - warm->values).cwiseAbs().maxCoeff();
    result.bound_violations += solve.stats.bound_violations;
    result.levels.push_back(record);
    result.trajectory = std::move(solve.trajectory);
  }

  const UnfoldedTrajectory& z = result.trajectory;
  for (int i = 0; i < z.dim(); ++i) {
    const double sign = target[i] > start[i] ? 1.0 : -1.0;
    for (int k = 0; k < z.grid.nodes(); ++k) {
      if (!(sign * z.derivs(k, i) > 0.0)) {
        std::ostringstream os;
        os << "derivative of component " << i + 1 << " changes sign at t = "
           << z.grid.t(k);
        throw Error(ErrorKind::MonotonicityLost, os.str());
      }
    }
  }
  result.residual = integrated_residual(field, domain, z);
  result.residual_ok = result.residual.max_residual <= config.tol_residual;
  return result;
}

RichardsonEstimate richardson_error(const UnfoldedTrajectory& coarse,
                                    const UnfoldedTrajectory& fine) {
  if (fine.grid.intervals() != 2 * coarse.grid.intervals()) {
    throw Error(ErrorKind::BadInput, "Richardson estimate needs grids N and 2N");
  }
  double dv = 0.0;
  double dd = 0.0;
  for (int k = 0; k < coarse.grid.nodes(); ++k) {
    dv = std::max(dv, (coarse.values.row(k) - fine.values.row(2 * k)).norm());
    dd = std::max(dd, (coarse.derivs.row(k) - fine.derivs.row(2 * k)).norm());
  }
  // e_N - e_2N = (3/4) C h^2
  return {4.0 * dv / 3.0, 4.0 * dd / 3.0};
}

}  // namespace bbvp
