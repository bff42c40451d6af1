#include "bbvp/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <sstream>

#include "bbvp/error.hpp"
#include "bbvp/text.hpp"

namespace bbvp {

namespace pt = boost::property_tree;

namespace {

std::string require(const pt::ptree& tree, const std::string& key) {
  auto v = tree.get_optional<std::string>(key);
  if (!v) throw Error(ErrorKind::BadInput, "config is missing '" + key + "'");
  return *v;
}

std::optional<std::string> lookup(const pt::ptree& tree, const std::string& key) {
  auto v = tree.get_optional<std::string>(key);
  if (!v) return std::nullopt;
  return *v;
}

template <typename Fn>
auto with_key(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(ErrorKind::BadInput, "config key '" + key + "': " + e.what());
  }
}

double get_double(const pt::ptree& tree, const std::string& key, double fallback) {
  auto v = lookup(tree, key);
  return v ? with_key(key, [&] { return parse_double(*v); }) : fallback;
}

int get_int(const pt::ptree& tree, const std::string& key, int fallback) {
  auto v = lookup(tree, key);
  if (!v) return fallback;
  return with_key(key, [&] {
    const auto ints = parse_ints(*v);
    if (ints.size() != 1) throw Error(ErrorKind::BadInput, "expected one integer");
    return ints.front();
  });
}

bool get_bool(const pt::ptree& tree, const std::string& key, bool fallback) {
  auto v = lookup(tree, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw Error(ErrorKind::BadInput, "config key '" + key + "': expected true/false");
}

}  // namespace

ProblemConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::BadInput, std::string("malformed config: ") + e.what());
  }

  const Vec lower = with_key("domain.lower", [&] { return parse_vector(require(tree, "domain.lower")); });
  const Vec upper = with_key("domain.upper", [&] { return parse_vector(require(tree, "domain.upper")); });
  ProblemConfig cfg{BoxDomain(lower, upper), {}, {}, 1.0, {}, {}, std::nullopt, 1, text};
  cfg.A = with_key("endpoints.A", [&] { return parse_vector(require(tree, "endpoints.A")); });
  cfg.B = with_key("endpoints.B", [&] { return parse_vector(require(tree, "endpoints.B")); });
  if (cfg.A.size() != lower.size() || cfg.B.size() != lower.size()) {
    throw Error(ErrorKind::BadInput, "endpoints A and B must match the box dimension");
  }
  cfg.horizon = get_double(tree, "endpoints.T", 1.0);

  if (auto field = tree.get_child_optional("field")) {
    for (const auto& [key, node] : *field) {
      const std::string value = node.get_value<std::string>();
      if (key == "name") {
        cfg.field.name = value;
      } else if (key == "bound") {
        cfg.field.bound = with_key("field.bound", [&] { return parse_double(value); });
      } else {
        cfg.field.params[key] = value;
      }
    }
  }

  SolverConfig& s = cfg.options.solver;
  s.intervals = get_int(tree, "solver.N", s.intervals);
  s.tol_fp = get_double(tree, "solver.tol_fp", s.tol_fp);
  s.max_iter = get_int(tree, "solver.max_iter", s.max_iter);
  s.damping = get_double(tree, "solver.damping", s.damping);
  s.anderson_depth = get_int(tree, "solver.anderson_depth", s.anderson_depth);
  if (auto sched = lookup(tree, "solver.m_schedule")) {
    s.m_schedule = with_key("solver.m_schedule", [&] { return parse_ints(*sched); });
  }
  s.tol_residual = get_double(tree, "solver.tol_residual", s.tol_residual);
  s.limit_level = get_bool(tree, "solver.limit_level", s.limit_level);
  s.resolve_crossings = get_bool(tree, "solver.resolve_crossings", s.resolve_crossings);
  s.early_stop = get_bool(tree, "solver.early_stop", s.early_stop);
  s.validate();

  cfg.options.merge_tol = get_double(tree, "billiard.merge_tol", cfg.options.merge_tol);
  cfg.options.verify.ode = get_double(tree, "verify.tol_ode", cfg.options.verify.ode);
  cfg.options.verify.reflection =
      get_double(tree, "verify.tol_reflection", cfg.options.verify.reflection);
  cfg.options.verify.boundary = get_double(tree, "verify.tol_boundary", cfg.options.verify.boundary);
  cfg.options.oracle.step_count = get_int(tree, "oracle.step_count", cfg.options.oracle.step_count);
  cfg.options.oracle.event_tol = get_double(tree, "oracle.event_tol", cfg.options.oracle.event_tol);
  cfg.options.oracle.terminal_tol =
      get_double(tree, "oracle.terminal_tol", cfg.options.oracle.terminal_tol);
  cfg.options.run_oracle = get_bool(tree, "oracle.enabled", cfg.options.run_oracle);
  if (lookup(tree, "multiplicity.p")) cfg.p = get_int(tree, "multiplicity.p", 0);
  cfg.jobs = get_int(tree, "multiplicity.jobs", cfg.jobs);
  return cfg;
}

ProblemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::BadInput, "cannot open config file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

std::string example_table_config() {
  return R"([domain]
lower = -2 -2
upper = 2 2

[endpoints]
A = -1 0.5
B = 0.75 -1.25
T = 1

[field]
name = table:gaussian-dimple
g = 9.81
bound = 4.905

[solver]
N = 4096
tol_fp = 1e-10
max_iter = 500
damping = 0.5
anderson_depth = 3
m_schedule = 4 8 16 32 64 128
tol_residual = 1e-6

[billiard]
merge_tol = 1e-8

[verify]
tol_ode = 1e-3
tol_reflection = 1e-12
tol_boundary = 1e-9

[oracle]
step_count = 8192
event_tol = 1e-12
)";
}

Problem make_problem(const ProblemConfig& config) {
  Normalized norm = normalize(config.domain, config.A, config.B);
  ForceField original = FieldRegistry::global().make(config.field, config.domain, config.horizon);
  return Problem{config, norm, original.shifted(norm.shift)};
}

}  // namespace bbvp
