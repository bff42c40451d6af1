#include "bbvp/billiard.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bbvp/error.hpp"

namespace bbvp {

namespace {

struct Crossing {
  double time;
  int axis;
  long line;  // z_axis = line * c_axis
};

double refine_crossing(const UnfoldedTrajectory& z, const BoxDomain& domain,
                       int axis, double level, int j) {
  double a = z.grid.t(j);
  double b = z.grid.t(j + 1);
  double fa = z.values(j, axis) - level;
  if (fa == 0.0) return a;
  if (z.values(j + 1, axis) == level) return b;
  const double eps = domain.grid_eps(axis);
  double mid = 0.5 * (a + b);
  for (int it = 0; it < 50; ++it) {
    mid = 0.5 * (a + b);
    const double fm = z.component_at(axis, mid) - level;
    if (std::abs(fm) <= eps && b - a <= 1e-12 * z.grid.horizon()) break;
    if (fm == 0.0) break;
    if ((fa < 0.0) == (fm < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return mid;
}

std::vector<Crossing> axis_crossings(const UnfoldedTrajectory& z,
                                     const BoxDomain& domain, int i) {
  const int N = z.grid.intervals();
  const double c = domain.edge(i);
  const double z0 = z.values(0, i);
  const double zT = z.values(N, i);
  const double dir = zT > z0 ? 1.0 : (zT < z0 ? -1.0 : 0.0);
  std::vector<Crossing> out;
  for (int j = 0; j < N; ++j) {
    const double a = z.values(j, i);
    const double b = z.values(j + 1, i);
    if (dir == 0.0 || (b - a) * dir < 0.0 || z.derivs(j, i) * dir <= 0.0) {
      std::ostringstream os;
      os << "component " << i + 1 << " is not strictly monotone near t = "
         << z.grid.t(j);
      throw Error(ErrorKind::MonotonicityLost, os.str());
    }
    if (dir > 0.0) {
      // lines L with a < L <= b
      for (long k = static_cast<long>(std::floor(a / c)) + 1;
           static_cast<double>(k) * c <= b; ++k) {
        out.push_back({refine_crossing(z, domain, i, k * c, j), i, k});
      }
    } else {
      // lines L with b <= L < a
      for (long k = static_cast<long>(std::ceil(a / c)) - 1;
           static_cast<double>(k) * c >= b; --k) {
        out.push_back({refine_crossing(z, domain, i, k * c, j), i, k});
      }
    }
  }
  for (std::size_t q = 1; q < out.size(); ++q) {
    if (out[q].line == out[q - 1].line) {
      std::ostringstream os;
      os << "grid line " << out[q].line << " of axis " << i + 1
         << " is crossed twice";
      throw Error(ErrorKind::MonotonicityLost, os.str());
    }
  }
  return out;
}

std::vector<long> segment_cells(const UnfoldedTrajectory& z,
                                const BoxDomain& domain, double t0, double t1) {
  const Vec mid = z.position_at(0.5 * (t0 + t1));
  std::vector<long> cells(mid.size());
  for (int i = 0; i < domain.dim(); ++i) cells[i] = domain.raw_cell(i, mid[i]);
  return cells;
}

Sample folded_sample(double t, const Vec& zk, const Vec& zdot,
                     const BoxDomain& domain, const std::vector<long>& cells) {
  Sample s{t, Vec(zk.size()), Vec(zk.size()), zk, zdot};
  for (int i = 0; i < domain.dim(); ++i) {
    s.x[i] = delta_in_cell(domain.edge(i), zk[i], cells[i]);
    s.v[i] = theta_in_cell(cells[i]) * zdot[i];
  }
  return s;
}

}  // namespace

std::vector<std::vector<double>> locate_crossings(const UnfoldedTrajectory& z,
                                                  const BoxDomain& domain) {
  std::vector<std::vector<double>> out(z.dim());
  for (int i = 0; i < z.dim(); ++i) {
    const auto crossings = axis_crossings(z, domain, i);
    for (const auto& c : crossings) out[i].push_back(c.time);
    const auto expected = crossing_counts(domain, z.value(0), z.value(z.grid.intervals()));
    if (static_cast<long>(out[i].size()) != expected[i]) {
      std::ostringstream os;
      os << "axis " << i + 1 << " has " << out[i].size()
         << " crossings, endpoint formula gives " << expected[i];
      throw Error(ErrorKind::MonotonicityLost, os.str());
    }
  }
  return out;
}

std::vector<long> crossing_counts(const BoxDomain& domain, const Vec& z0,
                                  const Vec& zT) {
  std::vector<long> counts(domain.dim());
  for (int i = 0; i < domain.dim(); ++i) {
    counts[i] = std::labs(domain.cell_index(i, z0[i]) - domain.cell_index(i, zT[i]));
  }
  return counts;
}

long impact_count_formula(const BoxDomain& domain, const Vec& z0, const Vec& zT) {
  long total = 0;
  for (long c : crossing_counts(domain, z0, zT)) total += c;
  return total;
}

int BilliardSolution::total_multiplicity() const {
  int total = 0;
  for (const auto& e : impacts) total += e.multiplicity();
  return total;
}

BilliardSolution fold_trajectory(const UnfoldedTrajectory& z,
                                 const BoxDomain& domain, double merge_tol) {
  const int N = z.grid.intervals();
  const int n = z.dim();
  const double T = z.grid.horizon();
  const Vec z0 = z.value(0);
  const Vec zT = z.value(N);
  for (int i = 0; i < n; ++i) {
    if (domain.on_grid_line(i, z0[i]) || domain.on_grid_line(i, zT[i])) {
      std::ostringstream os;
      os << "endpoint component " << i + 1 << " lies on a grid line";
      throw Error(ErrorKind::EndpointOnGridLine, os.str());
    }
  }

  std::vector<Crossing> all;
  for (int i = 0; i < n; ++i) {
    const auto axis = axis_crossings(z, domain, i);
    all.insert(all.end(), axis.begin(), axis.end());
  }
  std::sort(all.begin(), all.end(), [](const Crossing& a, const Crossing& b) {
    return a.time < b.time || (a.time == b.time && a.axis < b.axis);
  });

  // Group crossings of distinct axes that fall within merge_tol of the
  // group's first crossing.
  std::vector<std::vector<Crossing>> groups;
  for (const auto& c : all) {
    if (!groups.empty()) {
      auto& g = groups.back();
      const bool axis_taken = std::any_of(g.begin(), g.end(),
                                          [&](const Crossing& o) { return o.axis == c.axis; });
      if (!axis_taken && c.time - g.front().time <= merge_tol) {
        g.push_back(c);
        continue;
      }
    }
    groups.push_back({c});
  }

  BilliardSolution sol;
  sol.A = domain.fold(z0);
  sol.B = domain.fold(zT);
  sol.shift = Vec::Zero(n);
  sol.horizon = T;

  for (const auto& g : groups) {
    double s = 0.0;
    for (const auto& c : g) s += c.time;
    s /= static_cast<double>(g.size());
    const Vec zs = z.position_at(s);
    const Vec zdot = z.velocity_at(s);
    ImpactEvent e;
    e.time = s;
    e.point = domain.fold(zs);
    e.v_pre = Vec(n);
    e.v_post = Vec(n);
    for (int i = 0; i < n; ++i) {
      const auto hit = std::find_if(g.begin(), g.end(),
                                    [&](const Crossing& c) { return c.axis == i; });
      if (hit != g.end()) {
        const bool up = zT[i] > z0[i];
        const long before = up ? hit->line - 1 : hit->line;
        const long after = up ? hit->line : hit->line - 1;
        e.axes.push_back(i);
        e.point[i] = (hit->line % 2 == 0) ? 0.0 : domain.edge(i);
        e.v_pre[i] = theta_in_cell(before) * zdot[i];
        e.v_post[i] = theta_in_cell(after) * zdot[i];
      } else {
        const int th = theta_in_cell(domain.raw_cell(i, zs[i]));
        e.v_pre[i] = th * zdot[i];
        e.v_post[i] = e.v_pre[i];
      }
    }
    sol.impacts.push_back(std::move(e));
  }

  const long formula = impact_count_formula(domain, z0, zT);
  if (sol.total_multiplicity() != formula) {
    std::ostringstream os;
    os << "folded impacts total " << sol.total_multiplicity()
       << " but the endpoint formula gives " << formula;
    throw Error(ErrorKind::MonotonicityLost, os.str());
  }

  // Segments between consecutive impact times.
  std::vector<double> bounds{0.0};
  for (const auto& e : sol.impacts) bounds.push_back(e.time);
  bounds.push_back(T);
  const double coincide = 1e-12 * T;
  int k = 0;
  for (std::size_t q = 0; q + 1 < bounds.size(); ++q) {
    const double t0 = bounds[q];
    const double t1 = bounds[q + 1];
    const auto cells = segment_cells(z, domain, t0, t1);
    Segment seg;
    if (q == 0) {
      seg.samples.push_back(folded_sample(0.0, z0, z.deriv(0), domain, cells));
    } else {
      const auto& e = sol.impacts[q - 1];
      seg.samples.push_back(Sample{t0, e.point, e.v_post, z.position_at(t0), z.velocity_at(t0)});
    }
    while (k <= N && z.grid.t(k) <= t0 + coincide) ++k;
    while (k < N && z.grid.t(k) < t1 - coincide) {
      seg.samples.push_back(folded_sample(z.grid.t(k), z.value(k), z.deriv(k), domain, cells));
      ++k;
    }
    if (q + 1 == bounds.size() - 1) {
      seg.samples.push_back(folded_sample(T, zT, z.deriv(N), domain, cells));
    } else {
      const auto& e = sol.impacts[q];
      seg.samples.push_back(Sample{t1, e.point, e.v_pre, z.position_at(t1), z.velocity_at(t1)});
    }
    sol.segments.push_back(std::move(seg));
  }
  return sol;
}

VerifyReport verify_solution(const BilliardSolution& sol, const ForceField& field,
                             const BoxDomain& domain, const VerifyTolerances& tol) {
  VerifyReport r;
  const double T = sol.horizon;
  double min_spacing = T;
  const double slack = 1e-12 * std::max(1.0, domain.diameter());

  for (std::size_t q = 0; q < sol.segments.size(); ++q) {
    const auto& s = sol.segments[q].samples;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (!domain.contains(s[k].x, slack)) r.inside_box = false;
      if (k + 1 < s.size() && s[k + 1].t > s[k].t) {
        min_spacing = std::min(min_spacing, s[k + 1].t - s[k].t);
      }
      const bool at_impact = (k == 0 && q > 0) || (k + 1 == s.size() && q + 1 < sol.segments.size());
      if (!at_impact) {
        for (int i = 0; i < domain.dim(); ++i) {
          const double eps = domain.grid_eps(i);
          if (s[k].x[i] <= domain.lower()[i] + eps || s[k].x[i] >= domain.upper()[i] - eps) {
            r.boundary_only_at_impacts = false;
          }
        }
      }
      if (k == 0 || k + 1 == s.size()) continue;
      const double h0 = s[k].t - s[k - 1].t;
      const double h1 = s[k + 1].t - s[k].t;
      if (!(h0 > 0.0) || std::abs(h1 - h0) > 1e-9 * (h0 + h1)) continue;
      const Vec second = (s[k - 1].x - 2.0 * s[k].x + s[k + 1].x) / (h0 * h1);
      const double res = (second - field(s[k].t, s[k].x)).cwiseAbs().maxCoeff();
      r.ode_residual = std::max(r.ode_residual, res);
      ++r.ode_samples;
    }
  }
  r.resolution = min_spacing;

  for (const auto& e : sol.impacts) {
    for (int i = 0; i < domain.dim(); ++i) {
      const bool hit = std::find(e.axes.begin(), e.axes.end(), i) != e.axes.end();
      const double v = hit ? std::abs(e.v_post[i] + e.v_pre[i])
                           : std::abs(e.v_post[i] - e.v_pre[i]);
      r.reflection_violation = std::max(r.reflection_violation, v);
      if (hit) {
        const double face = std::min(std::abs(e.point[i] - domain.lower()[i]),
                                     std::abs(e.point[i] - domain.upper()[i]));
        if (face > domain.grid_eps(i)) r.inside_box = false;
      }
    }
    if (e.axes.empty()) r.reflection_violation = std::max(r.reflection_violation, 1.0);
    const double pre = e.v_pre.norm();
    if (pre > 0.0) {
      r.energy_violation = std::max(r.energy_violation, std::abs(e.v_post.norm() - pre) / pre);
    }
  }

  if (!sol.segments.empty()) {
    r.start_error = (sol.segments.front().samples.front().x - sol.A).cwiseAbs().maxCoeff();
    r.end_error = (sol.segments.back().samples.back().x - sol.B).cwiseAbs().maxCoeff();
  }
  r.pass = r.ode_residual <= tol.ode && r.reflection_violation <= tol.reflection &&
           r.energy_violation <= tol.reflection && r.start_error <= tol.boundary &&
           r.end_error <= tol.boundary && r.inside_box && r.boundary_only_at_impacts;
  return r;
}

}  // namespace bbvp
