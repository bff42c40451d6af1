#include "bbvp/report.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "bbvp/error.hpp"
#include "bbvp/text.hpp"

#ifndef BBVP_VERSION
#define BBVP_VERSION "0.0.0"
#endif

namespace bbvp {

const char* version() { return BBVP_VERSION; }

void write_trajectory_csv(std::ostream& os, const BilliardSolution& sol) {
  const int n = static_cast<int>(sol.A.size());
  const Vec shift = sol.shift.size() == n ? sol.shift : Vec(Vec::Zero(n));
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",x_" << i;
  for (int i = 1; i <= n; ++i) os << ",v_" << i;
  os << ",segment_id\n";
  for (std::size_t q = 0; q < sol.segments.size(); ++q) {
    for (const auto& s : sol.segments[q].samples) {
      os << format_double(s.t);
      for (int i = 0; i < n; ++i) os << ',' << format_double(s.x[i] + shift[i]);
      for (int i = 0; i < n; ++i) os << ',' << format_double(s.v[i]);
      os << ',' << q << '\n';
    }
  }
}

BilliardSolution read_trajectory_csv(std::istream& is, const BoxDomain& normalized_box,
                                     const Vec& shift, const Vec& A, const Vec& B,
                                     double horizon) {
  const int n = normalized_box.dim();
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::BadInput, "empty trajectory CSV");
  {
    int cols = 1;
    for (char ch : line) cols += ch == ',';
    if (cols != 2 * n + 2 || line.rfind("t,", 0) != 0) {
      throw Error(ErrorKind::BadInput, "trajectory CSV header does not match the box dimension");
    }
  }
  BilliardSolution sol;
  sol.A = A;
  sol.B = B;
  sol.shift = shift;
  sol.horizon = horizon;
  long current = -1;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != 2 * n + 2) {
      throw Error(ErrorKind::BadInput, "trajectory CSV row " + std::to_string(row) + " has wrong width");
    }
    Sample s;
    s.t = parse_double(cells[0]);
    s.x = Vec(n);
    s.v = Vec(n);
    for (int i = 0; i < n; ++i) {
      s.x[i] = parse_double(cells[1 + i]) - shift[i];
      s.v[i] = parse_double(cells[1 + n + i]);
    }
    const long seg = static_cast<long>(parse_double(cells[2 * n + 1]));
    if (seg != current) {
      if (seg != current + 1) {
        throw Error(ErrorKind::BadInput, "trajectory CSV segments are not consecutive");
      }
      sol.segments.emplace_back();
      current = seg;
    }
    sol.segments.back().samples.push_back(std::move(s));
  }
  if (sol.segments.empty()) throw Error(ErrorKind::BadInput, "trajectory CSV has no rows");

  for (std::size_t q = 0; q + 1 < sol.segments.size(); ++q) {
    const Sample& pre = sol.segments[q].samples.back();
    const Sample& post = sol.segments[q + 1].samples.front();
    ImpactEvent e;
    e.time = pre.t;
    e.point = pre.x;
    e.v_pre = pre.v;
    e.v_post = post.v;
    for (int i = 0; i < n; ++i) {
      const double eps = normalized_box.grid_eps(i);
      if (std::abs(pre.x[i]) <= eps) {
        e.axes.push_back(i);
        e.point[i] = 0.0;
      } else if (std::abs(pre.x[i] - normalized_box.edge(i)) <= eps) {
        e.axes.push_back(i);
        e.point[i] = normalized_box.edge(i);
      }
    }
    sol.impacts.push_back(std::move(e));
  }
  return sol;
}

Json to_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Json to_json(const ImpactEvent& e, const Vec& shift) {
  Json axes = Json::array();
  for (int a : e.axes) axes.push_back(a + 1);
  return Json{{"time", e.time},
              {"point", to_json(Vec(e.point + shift))},
              {"axes", axes},
              {"multiplicity", e.multiplicity()},
              {"v_pre", to_json(e.v_pre)},
              {"v_post", to_json(e.v_post)}};
}

Json to_json(const VerifyReport& r) {
  return Json{{"pass", r.pass},
              {"ode_residual", r.ode_residual},
              {"ode_samples", r.ode_samples},
              {"reflection_violation", r.reflection_violation},
              {"energy_violation", r.energy_violation},
              {"start_error", r.start_error},
              {"end_error", r.end_error},
              {"inside_box", r.inside_box},
              {"boundary_only_at_impacts", r.boundary_only_at_impacts},
              {"certificate_resolution", r.resolution}};
}

Json to_json(const CrosscheckReport& r) {
  return Json{{"terminal_gap", r.terminal_gap},
              {"max_impact_time_gap", r.max_impact_time_gap},
              {"sim_impacts", r.sim_impacts},
              {"sol_impacts", r.sol_impacts},
              {"sim_multiplicity", r.sim_multiplicity},
              {"sol_multiplicity", r.sol_multiplicity},
              {"counts_match", r.counts_match},
              {"pass", r.pass}};
}

Json to_json(const ContinuationResult& r) {
  Json levels = Json::array();
  for (const auto& l : r.levels) {
    levels.push_back(Json{{"m", l.level ? Json(*l.level) : Json("inf")},
                          {"iterations", l.stats.iterations},
                          {"fixed_point_residual", l.stats.residual},
                          {"bound_violations", l.stats.bound_violations},
                          {"anderson_rejections", l.stats.anderson_rejections},
                          {"change_from_previous", l.change}});
  }
  const auto& z = r.trajectory;
  return Json{{"levels", levels},
              {"stopping_rule", r.stopped_early ? "heuristic-early-stop" : "full-schedule"},
              {"integrated_residual", r.residual.max_residual},
              {"integrated_residual_ok", r.residual_ok},
              {"residual_windows", r.residual.windows},
              {"residual_excluded_nodes", r.residual.excluded_nodes},
              {"bound_violations", r.bound_violations},
              {"max_value_norm", max_value_norm(z)},
              {"max_velocity_deviation", max_velocity_deviation(z)}};
}

Json branch_json(const BranchOutcome& b, const Vec& shift) {
  Json xi = Json::array();
  for (int x : b.spec.xi) xi.push_back(x);
  Json out{{"xi", xi},
           {"p", b.spec.p},
           {"target", to_json(b.spec.target)},
           {"status", to_string(b.status)},
           {"message", b.message}};
  if (b.solution) {
    out["p_impacts"] = b.solution->impact_count();
    out["total_mult"] = b.solution->total_multiplicity();
  } else {
    out["p_impacts"] = nullptr;
    out["total_mult"] = nullptr;
  }
  Json residuals = Json::object();
  if (b.continuation) {
    const auto& levels = b.continuation->levels;
    residuals["fixed_point"] = levels.empty() ? 0.0 : levels.back().stats.residual;
    residuals["integrated_equation"] = b.continuation->residual.max_residual;
  }
  if (b.verify) {
    residuals["ode"] = b.verify->ode_residual;
    residuals["reflection"] = b.verify->reflection_violation;
    residuals["boundary"] = std::max(b.verify->start_error, b.verify->end_error);
  }
  if (b.crosscheck) {
    residuals["oracle_terminal_gap"] = b.crosscheck->terminal_gap;
    residuals["oracle_impact_time_gap"] = b.crosscheck->max_impact_time_gap;
  }
  out["residuals"] = residuals;
  if (b.continuation) out["continuation"] = to_json(*b.continuation);
  if (b.verify) out["verify"] = to_json(*b.verify);
  if (b.crosscheck) out["crosscheck"] = to_json(*b.crosscheck);
  if (b.solution) {
    Json impacts = Json::array();
    for (const auto& e : b.solution->impacts) impacts.push_back(to_json(e, shift));
    out["impacts"] = impacts;
  }
  return out;
}

Json certificate_json(const MultiplicityCertificate& cert, const Vec& shift,
                      const std::string& config_text) {
  Json branches = Json::array();
  for (const auto& b : cert.branches) branches.push_back(branch_json(b, shift));
  Json matrix = Json::array();
  for (Eigen::Index a = 0; a < cert.distinctness.rows(); ++a) {
    Json row = Json::array();
    for (Eigen::Index b = 0; b < cert.distinctness.cols(); ++b) {
      const double d = cert.distinctness(a, b);
      row.push_back(std::isfinite(d) ? Json(d) : Json(nullptr));
    }
    matrix.push_back(row);
  }
  return Json{{"version", version()},
              {"p", cert.p},
              {"min_p", cert.min_p},
              {"branch_count", cert.branches.size()},
              {"converged", cert.converged()},
              {"partial", cert.partial},
              {"distinct_threshold", cert.distinct_threshold},
              {"distinct_ok", cert.distinct_ok},
              {"distinctness", matrix},
              {"branches", branches},
              {"config", config_text}};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::BadInput, "cannot write " + tmp);
    out << content;
    if (!out) throw Error(ErrorKind::BadInput, "failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace bbvp
