// Command-line driver: solve one branch, enumerate all branches, verify a
// stored trajectory, or emit the uneven-table example config.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bbvp/config.hpp"
#include "bbvp/error.hpp"
#include "bbvp/report.hpp"
#include "bbvp/text.hpp"

namespace fs = std::filesystem;
using namespace bbvp;

namespace {

constexpr int kOk = 0;
constexpr int kConvergence = 2;
constexpr int kInvariant = 3;
constexpr int kBadInput = 4;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotConverged: return kConvergence;
    case ErrorKind::MonotonicityLost:
    case ErrorKind::BoundViolation:
    case ErrorKind::StuckAtBoundary: return kInvariant;
    default: return kBadInput;
  }
}

int exit_code(BranchStatus status) {
  switch (status) {
    case BranchStatus::Converged: return kOk;
    case BranchStatus::NotConverged: return kConvergence;
    case BranchStatus::PreconditionViolated: return kBadInput;
    default: return kInvariant;
  }
}

std::string csv_text(const BilliardSolution& sol) {
  std::ostringstream os;
  write_trajectory_csv(os, sol);
  return os.str();
}

Json run_header(const ProblemConfig& cfg, const Problem& problem) {
  return Json{{"version", version()},
              {"dimension", problem.norm.box.dim()},
              {"mbar", problem.field.bound_integral()},
              {"min_p", min_p(problem.norm.box, problem.field)},
              {"config", cfg.text}};
}

int cmd_solve(const std::string& config_path, const std::string& xi_text,
              std::optional<int> p_opt, const std::string& out_dir) {
  const ProblemConfig cfg = load_config(config_path);
  const Problem problem = make_problem(cfg);
  const auto& box = problem.norm.box;
  const int p = p_opt ? *p_opt : cfg.p.value_or(min_p(box, problem.field));
  const std::vector<int> xi = xi_text.empty() ? std::vector<int>(box.dim(), 1) : parse_ints(xi_text);
  const BranchSpec spec = make_branch(box, problem.norm.A, problem.norm.B, p, xi);

  BranchOutcome outcome =
      solve_branch(problem.field, box, problem.norm.A, problem.norm.B, spec, cfg.options);
  fs::create_directories(out_dir);
  Json report = run_header(cfg, problem);
  report["branch"] = branch_json(outcome, problem.norm.shift);
  if (outcome.solution) {
    outcome.solution->shift = problem.norm.shift;
    write_file_atomic(fs::path(out_dir) / "trajectory.csv", csv_text(*outcome.solution));
  }
  write_file_atomic(fs::path(out_dir) / "report.json", report.dump(2) + "\n");

  std::cout << "branch " << spec.label() << " p=" << p << ": " << to_string(outcome.status);
  if (outcome.solution) {
    std::cout << ", impacts " << outcome.solution->impact_count() << ", total_mult "
              << outcome.solution->total_multiplicity();
  }
  std::cout << '\n';
  if (!outcome.message.empty()) std::cerr << outcome.message << '\n';
  return exit_code(outcome.status);
}

int cmd_enumerate(const std::string& config_path, std::optional<int> p_opt,
                  std::optional<int> jobs, const std::string& out_dir) {
  const ProblemConfig cfg = load_config(config_path);
  const Problem problem = make_problem(cfg);
  EnumerateOptions options;
  options.p = p_opt ? p_opt : cfg.p;
  options.branch = cfg.options;
  options.jobs = jobs.value_or(cfg.jobs);
  MultiplicityCertificate cert = enumerate_solutions(problem.norm.box, problem.field,
                                                     problem.norm.A, problem.norm.B, options);
  fs::create_directories(out_dir);
  for (auto& b : cert.branches) {
    if (!b.solution) continue;
    b.solution->shift = problem.norm.shift;
    write_file_atomic(fs::path(out_dir) / ("branch_" + b.spec.label() + ".csv"),
                      csv_text(*b.solution));
  }
  Json json = certificate_json(cert, problem.norm.shift, cfg.text);
  write_file_atomic(fs::path(out_dir) / "certificate.json", json.dump(2) + "\n");

  int code = kOk;
  for (const auto& b : cert.branches) {
    std::cout << "branch " << b.spec.label() << ": " << to_string(b.status);
    if (b.solution) {
      std::cout << ", impacts " << b.solution->impact_count() << ", total_mult "
                << b.solution->total_multiplicity();
    }
    std::cout << '\n';
    code = std::max(code, exit_code(b.status));
  }
  std::cout << cert.converged() << "/" << cert.branches.size() << " branches converged (p="
            << cert.p << ", min_p=" << cert.min_p << ")"
            << (cert.distinct_ok ? "" : "; distinctness check FAILED") << '\n';
  if (!cert.distinct_ok) code = std::max(code, kInvariant);
  return code;
}

int cmd_verify(const std::string& config_path, const std::string& csv_path,
               const std::string& report_path) {
  const ProblemConfig cfg = load_config(config_path);
  const Problem problem = make_problem(cfg);
  std::ifstream in(csv_path);
  if (!in) throw Error(ErrorKind::BadInput, "cannot open trajectory " + csv_path);
  const BilliardSolution sol =
      read_trajectory_csv(in, problem.norm.box, problem.norm.shift, problem.norm.A,
                          problem.norm.B, cfg.horizon);
  const VerifyReport verify =
      verify_solution(sol, problem.field, problem.norm.box, cfg.options.verify);
  const CrosscheckReport cross =
      crosscheck(sol, problem.field, problem.norm.box, cfg.options.oracle);
  Json report = run_header(cfg, problem);
  report["impacts"] = sol.impact_count();
  report["total_mult"] = sol.total_multiplicity();
  report["verify"] = to_json(verify);
  report["crosscheck"] = to_json(cross);
  const std::string text = report.dump(2) + "\n";
  if (report_path.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(report_path, text);
  }
  if (!verify.pass) std::cerr << "verification failed\n";
  if (!cross.pass) std::cerr << "forward simulation disagrees with the trajectory\n";
  return verify.pass && cross.pass ? kOk : kInvariant;
}

int cmd_example_table(const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << example_table_config();
  } else {
    write_file_atomic(out_path, example_table_config());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple solutions of the Dirichlet problem in a box billiard"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = ".";
  std::string xi;
  std::optional<int> p;
  std::optional<int> jobs;
  std::string csv;
  std::string report;
  std::string example_out;

  auto* solve = app.add_subcommand("solve", "solve one branch (sign vector xi, budget p)");
  solve->add_option("-c,--config", config, "problem config file")->required();
  solve->add_option("--xi", xi, "sign vector, e.g. \"+ -\" or \"1 -1\" (default all +)");
  solve->add_option("-p,--p", p, "impact budget (default: config or min_p)");
  solve->add_option("-o,--out", out_dir, "output directory");

  auto* enumerate = app.add_subcommand("enumerate", "solve all 2^n branches and certify");
  enumerate->add_option("-c,--config", config, "problem config file")->required();
  enumerate->add_option("-p,--p", p, "impact budget (default: config or min_p)");
  enumerate->add_option("-j,--jobs", jobs, "parallel branch solves");
  enumerate->add_option("-o,--out", out_dir, "output directory");

  auto* verify = app.add_subcommand("verify", "check a trajectory CSV against the problem");
  verify->add_option("-c,--config", config, "problem config file")->required();
  verify->add_option("-s,--solution", csv, "trajectory CSV")->required();
  verify->add_option("-r,--report", report, "write the JSON report here instead of stdout");

  auto* example = app.add_subcommand("example-table", "print the uneven-table example config");
  example->add_option("-o,--out", example_out, "write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*solve) return cmd_solve(config, xi, p, out_dir);
    if (*enumerate) return cmd_enumerate(config, p, jobs, out_dir);
    if (*verify) return cmd_verify(config, csv, report);
    if (*example) return cmd_example_table(example_out);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  }
  return kOk;
}
