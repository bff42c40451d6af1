#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bbvp/config.hpp"
#include "bbvp/error.hpp"
#include "bbvp/report.hpp"
#include "bbvp/text.hpp"

using namespace bbvp;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

const char* kZeroConfig = R"([domain]
lower = 0 0
upper = 1 1
[endpoints]
A = 0.25 0.25
B = 0.75 0.5
T = 1
[field]
name = zero
[solver]
N = 256
[oracle]
step_count = 1024
[multiplicity]
p = 2
jobs = 2
)";

}  // namespace

TEST_CASE("text parsing") {
  CHECK(parse_vector("1 2.5 -3") == vec({1, 2.5, -3}));
  CHECK(parse_vector("(1, 2.5, -3)") == vec({1, 2.5, -3}));
  CHECK(parse_vector("[1e-3]") == vec({1e-3}));
  CHECK_THROWS_AS(parse_vector(""), Error);
  CHECK_THROWS_AS(parse_vector("1 x"), Error);
  CHECK(parse_ints("+ - +") == std::vector<int>{1, -1, 1});
  CHECK(parse_ints("4 8 16") == std::vector<int>{4, 8, 16});
  CHECK_THROWS_AS(parse_ints("1.5"), Error);
  CHECK(parse_double(" 0.125 ") == 0.125);
  CHECK_THROWS_AS(parse_double("0.1.2"), Error);
  const double x = 0.1 + 0.2;
  CHECK(parse_double(format_double(x)) == x);
}

TEST_CASE("config parsing") {
  const ProblemConfig cfg = parse_config(kZeroConfig);
  CHECK(cfg.domain.edges() == vec({1, 1}));
  CHECK(cfg.A == vec({0.25, 0.25}));
  CHECK(cfg.field.name == "zero");
  CHECK(cfg.options.solver.intervals == 256);
  CHECK(cfg.options.solver.m_schedule == std::vector<int>{4, 8, 16, 32, 64, 128});
  CHECK(cfg.options.oracle.step_count == 1024);
  CHECK(cfg.p == 2);
  CHECK(cfg.jobs == 2);
  CHECK(cfg.text == kZeroConfig);
}

TEST_CASE("config errors name the key") {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::BadInput);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("[domain]\nupper = 1\n").find("domain.lower") != std::string::npos);
  std::string bad = kZeroConfig;
  bad.replace(bad.find("N = 256"), 7, "N = abc");
  CHECK(message(bad).find("solver.N") != std::string::npos);
  bad = kZeroConfig;
  bad.replace(bad.find("N = 256"), 7, "N = 255");
  CHECK(message(bad) != "no error");
  bad = kZeroConfig;
  bad.replace(bad.find("A = 0.25 0.25"), 13, "A = 0.25");
  CHECK(message(bad) != "no error");
}

TEST_CASE("example table config") {
  const ProblemConfig cfg = parse_config(example_table_config());
  const Problem problem = make_problem(cfg);
  CHECK(problem.norm.box.edges() == vec({4, 4}));
  CHECK(problem.norm.A == vec({1, 2.5}));
  CHECK(problem.field.bound_integral() == doctest::Approx(4.905));
  CHECK(problem.field(0.0, vec({2, 2})).isZero(1e-15));
  CHECK(cfg.options.solver.intervals == 4096);
  CHECK(cfg.options.oracle.step_count == 8192);
}

TEST_CASE("boundary endpoint in config is bad input") {
  std::string text = kZeroConfig;
  text.replace(text.find("A = 0.25 0.25"), 13, "A = 0.00 0.25");
  CHECK_THROWS_AS(make_problem(parse_config(text)), Error);
}

TEST_CASE("trajectory CSV round trip") {
  const ProblemConfig cfg = parse_config(kZeroConfig);
  Problem problem = make_problem(cfg);
  const BoxDomain& box = problem.norm.box;
  const UnfoldedTrajectory z = straight_line(TimeGrid(1.0, 64), vec({0.25, 0.25}), vec({2.75, 2.5}));
  BilliardSolution sol = fold_trajectory(z, box, 1e-8);
  sol.A = vec({0.25, 0.25});
  sol.B = vec({0.75, 0.5});
  sol.shift = vec({10, -3});

  std::stringstream ss;
  write_trajectory_csv(ss, sol);
  const std::string text = ss.str();
  CHECK(text.rfind("t,x_1,x_2,v_1,v_2,segment_id\n", 0) == 0);

  const BilliardSolution back = read_trajectory_csv(ss, box, sol.shift, sol.A, sol.B, 1.0);
  REQUIRE(back.segments.size() == sol.segments.size());
  REQUIRE(back.impacts.size() == sol.impacts.size());
  for (std::size_t q = 0; q < sol.impacts.size(); ++q) {
    CHECK(back.impacts[q].axes == sol.impacts[q].axes);
    CHECK(back.impacts[q].time == sol.impacts[q].time);
    CHECK(back.impacts[q].v_post == sol.impacts[q].v_post);
  }
  for (std::size_t q = 0; q < sol.segments.size(); ++q) {
    REQUIRE(back.segments[q].samples.size() == sol.segments[q].samples.size());
    for (std::size_t k = 0; k < sol.segments[q].samples.size(); ++k) {
      CHECK((back.segments[q].samples[k].x - sol.segments[q].samples[k].x).norm() <= 1e-14);
    }
  }
  CHECK(verify_solution(back, zero_field(2, 1.0), box, VerifyTolerances{}).pass);

  std::istringstream wrong("t,x_1,v_1,segment_id\n0,0.5,1,0\n");
  CHECK_THROWS_AS(read_trajectory_csv(wrong, box, sol.shift, sol.A, sol.B, 1.0), Error);
}

TEST_CASE("certificate JSON keys and atomic write") {
  const ProblemConfig cfg = parse_config(kZeroConfig);
  const Problem problem = make_problem(cfg);
  EnumerateOptions o;
  o.p = 2;
  o.branch = cfg.options;
  const auto cert = enumerate_solutions(problem.norm.box, problem.field, problem.norm.A,
                                        problem.norm.B, o);
  const Json j = certificate_json(cert, problem.norm.shift, cfg.text);
  CHECK(j["version"] == version());
  CHECK(j["config"] == cfg.text);
  REQUIRE(j["branches"].size() == 4);
  const Json& b = j["branches"][0];
  std::vector<std::string> keys;
  for (auto it = b.begin(); it != b.end(); ++it) keys.push_back(it.key());
  REQUIRE(keys.size() >= 7);
  CHECK(std::vector<std::string>(keys.begin(), keys.begin() + 4) ==
        std::vector<std::string>{"xi", "p", "target", "status"});
  CHECK(b["total_mult"] == 4);
  CHECK(b["status"] == "converged");
  CHECK(j["distinctness"][0][0] == 0.0);

  const auto dir = std::filesystem::temp_directory_path() / "bbvp_io_test";
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "c.json", j.dump());
  std::ifstream in(dir / "c.json");
  std::stringstream read;
  read << in.rdbuf();
  CHECK(Json::parse(read.str()) == j);
  CHECK_FALSE(std::filesystem::exists(dir / "c.json.tmp"));
  std::filesystem::remove_all(dir);
}
