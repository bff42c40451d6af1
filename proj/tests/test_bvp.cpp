#include <doctest.h>

#include <cmath>
#include <random>

#include "bbvp/bvp.hpp"
#include "bbvp/error.hpp"

using namespace bbvp;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

SolverConfig small_config(int N) {
  SolverConfig c;
  c.intervals = N;
  return c;
}

}  // namespace

TEST_CASE("time grid") {
  TimeGrid g(2.0, 8);
  CHECK(g.step() == 0.25);
  CHECK(g.t(8) == 2.0);
  CHECK(g.nodes() == 9);
  CHECK_THROWS_AS(TimeGrid(1.0, 7), Error);
  CHECK_THROWS_AS(TimeGrid(1.0, 0), Error);
  CHECK_THROWS_AS(TimeGrid(0.0, 8), Error);
}

TEST_CASE("solver config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.m_schedule = {4, 4};
  CHECK_THROWS_AS(c.validate(), Error);
  c = SolverConfig{};
  c.damping = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = SolverConfig{};
  c.tol_fp = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("Green function") {
  CHECK(green(0.5, 0.5, 1.0) == doctest::Approx(-0.25));
  CHECK(green(0.0, 0.7, 1.0) == 0.0);
  CHECK(green(1.0, 0.7, 1.0) == 0.0);
  CHECK(green(0.3, 0.6, 1.0) == doctest::Approx(-0.12));
  CHECK(green(0.6, 0.3, 1.0) == doctest::Approx(-0.12));
  CHECK(green_dt(0.2, 0.5, 1.0) == doctest::Approx(-0.5));
  CHECK(green_dt(0.8, 0.5, 1.0) == doctest::Approx(0.5));
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double t = u(rng);
    const double s = u(rng);
    CHECK(green(t, s, 3.0) <= 0.0);
    CHECK(green(t, s, 3.0) == doctest::Approx(green(s, t, 3.0)));
    CHECK(std::abs(green_dt(t, s, 3.0)) <= 1.0);
  }
}

TEST_CASE("operator with zero force returns the straight line") {
  const BoxDomain box = BoxDomain::anchored(vec({1, 1}));
  const ForceField zero = zero_field(2, 1.0);
  const TimeGrid grid(1.0, 64);
  UnfoldedTrajectory y = straight_line(grid, vec({0.25, 0.25}), vec({2.75, 2.5}));
  y.values.array() += 0.1;  // any input
  y.values.row(0) = vec({0.25, 0.25}).transpose();
  const UnfoldedTrajectory out = apply_operator(zero, box, y, 8);
  const UnfoldedTrajectory line = straight_line(grid, vec({0.25, 0.25}), vec({2.75, 2.5}));
  CHECK((out.values - line.values).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((out.derivs - line.derivs).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("operator pins the endpoints exactly") {
  const BoxDomain box = BoxDomain::anchored(vec({1, 2}));
  const ForceField f(2, 1.0, [](double t, const Vec& x) { return vec({std::sin(x[1] + t), x[0] - 0.5}); }, 3.0);
  const TimeGrid grid(1.0, 128);
  const Vec A = vec({0.3, 0.7});
  const Vec zT = vec({-4.1, 7.3});
  UnfoldedTrajectory y = straight_line(grid, A, zT);
  for (const Level level : {Level{2}, Level{64}, Level{}}) {
    const UnfoldedTrajectory out = apply_operator(f, box, y, level);
    CHECK(out.value(0) == A);
    CHECK(out.value(grid.intervals()) == zT);
    y = out;
  }
}

TEST_CASE("operator on a constant load inside one plateau") {
  // x'' = kappa, zero Dirichlet data: x = line + kappa t (t - T) / 2.
  const double kappa = 0.3;
  const BoxDomain box = BoxDomain::anchored(vec({1}));
  const ForceField f = constant_field(vec({kappa}), 1.0);
  const TimeGrid grid(1.0, 200);
  const UnfoldedTrajectory y = straight_line(grid, vec({0.3}), vec({0.7}));
  const UnfoldedTrajectory out = apply_operator(f, box, y, 4);
  double err = 0.0;
  double derr = 0.0;
  for (int k = 0; k <= grid.intervals(); ++k) {
    const double t = grid.t(k);
    err = std::max(err, std::abs(out.values(k, 0) - (0.3 + 0.4 * t + kappa * t * (t - 1) / 2)));
    derr = std::max(derr, std::abs(out.derivs(k, 0) - (0.4 + kappa * (t - 0.5))));
  }
  CHECK(err <= 1e-14);
  CHECK(derr <= 1e-14);
}

TEST_CASE("regularized solve: zero force converges immediately") {
  const BoxDomain box = BoxDomain::anchored(vec({1, 1}));
  const ForceField zero = zero_field(2, 1.0);
  const auto r = solve_regularized(zero, box, vec({0.25, 0.25}), vec({2.75, 2.5}), 4, small_config(256));
  CHECK(r.stats.iterations == 1);
  CHECK(r.stats.residual == 0.0);
}

TEST_CASE("regularized solve: constant load in one cell matches the closed form") {
  const double kappa = -2.0;
  const BoxDomain box = BoxDomain::anchored(vec({100}));
  const ForceField f = constant_field(vec({kappa}), 1.0);
  const auto r = solve_regularized(f, box, vec({10}), vec({20}), 8, small_config(512));
  const auto& z = r.trajectory;
  double err = 0.0;
  for (int k = 0; k <= z.grid.intervals(); ++k) {
    const double t = z.grid.t(k);
    err = std::max(err, std::abs(z.values(k, 0) - (10 + 10 * t + kappa * t * (t - 1) / 2)));
  }
  CHECK(err <= 1e-9);
}

TEST_CASE("continuation: constant load across cells") {
  // f* flips sign from cell to cell; the limit solution is piecewise
  // parabolic. The integrated residual of the limit equation is checked
  // and the a-priori estimates hold with zero violations.
  const BoxDomain box = BoxDomain::anchored(vec({1, 1.5}));
  const ForceField f = constant_field(vec({0.8, -0.6}), 1.0);
  const Vec A = vec({0.3, 0.4});
  const Vec zT = vec({3.7, -2.9});
  const ContinuationResult r = continuation_solve(f, box, A, zT, small_config(1024));
  CHECK(r.residual_ok);
  CHECK(r.residual.max_residual <= 1e-9);
  CHECK(r.bound_violations == 0);
  CHECK(r.levels.size() == 7);
  CHECK_FALSE(r.levels.back().level.has_value());
  const auto& z = r.trajectory;
  const double mbar = f.bound_integral();
  for (int k = 0; k <= z.grid.intervals(); ++k) {
    for (int i = 0; i < 2; ++i) {
      const double mean = zT[i] - A[i];
      CHECK(z.derivs(k, i) >= mean - mbar - 1e-12);
      CHECK(z.derivs(k, i) <= mean + mbar + 1e-12);
    }
  }
  CHECK(max_value_norm(z) <= A.norm() + zT.norm() + mbar);
  CHECK(max_velocity_deviation(z) <= mbar + 1e-12);

  SUBCASE("uniform continuity of the derivative") {
    std::mt19937_64 rng(37);
    std::uniform_int_distribution<int> node(0, z.grid.intervals());
    for (int trial = 0; trial < 500; ++trial) {
      const int a = node(rng);
      const int b = node(rng);
      const double span = std::abs(z.grid.t(a) - z.grid.t(b)) * f.bound(0.0);
      CHECK((z.deriv(a) - z.deriv(b)).norm() <= span + 1e-9);
    }
  }
}

TEST_CASE("Richardson estimate for a crossing constant load") {
  const BoxDomain box = BoxDomain::anchored(vec({1}));
  const ForceField f = constant_field(vec({0.5}), 1.0);
  const auto coarse = continuation_solve(f, box, vec({0.3}), vec({2.6}), small_config(512));
  const auto fine = continuation_solve(f, box, vec({0.3}), vec({2.6}), small_config(1024));
  const RichardsonEstimate e = richardson_error(coarse.trajectory, fine.trajectory);
  CHECK(e.value_error < 1e-6);
  CHECK(e.velocity_error < 1e-6);
  CHECK_THROWS_AS(richardson_error(coarse.trajectory, coarse.trajectory), Error);
}

TEST_CASE("continuation preconditions and failure modes") {
  const BoxDomain box = BoxDomain::anchored(vec({1}));
  const ForceField f = constant_field(vec({0.5}), 1.0);
  SUBCASE("|z_T - A| = T mbar is rejected") {
    try {
      continuation_solve(f, box, vec({0.25}), vec({0.75}), small_config(64));
      FAIL("expected PreconditionViolated");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::PreconditionViolated);
    }
  }
  SUBCASE("endpoint on a grid line") {
    try {
      solve_regularized(f, box, vec({0.25}), vec({3.0}), 4, small_config(64));
      FAIL("expected EndpointOnGridLine");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::EndpointOnGridLine);
    }
  }
  SUBCASE("iteration budget exhausted") {
    SolverConfig c = small_config(64);
    c.max_iter = 2;
    c.anderson_depth = 0;
    try {
      solve_regularized(f, box, vec({0.25}), vec({3.6}), 4, c);
      FAIL("expected NotConverged");
    } catch (const NotConverged& e) {
      CHECK(e.kind() == ErrorKind::NotConverged);
      CHECK(e.iterations() == 2);
      CHECK(e.residual() > c.tol_fp);
    }
  }
  SUBCASE("zero field gives the line at every level") {
    const ForceField zero = zero_field(1, 1.0);
    const auto r = continuation_solve(zero, box, vec({0.25}), vec({-3.6}), small_config(64));
    const auto line = straight_line(r.trajectory.grid, vec({0.25}), vec({-3.6}));
    CHECK((r.trajectory.values - line.values).cwiseAbs().maxCoeff() <= 1e-12);
    for (const auto& l : r.levels) CHECK(l.stats.iterations == 1);
  }
}

TEST_CASE("early stop is opt-in and flagged") {
  const BoxDomain box = BoxDomain::anchored(vec({1}));
  const ForceField zero = zero_field(1, 1.0);
  SolverConfig c = small_config(64);
  c.early_stop = true;
  const auto r = continuation_solve(zero, box, vec({0.25}), vec({2.6}), c);
  CHECK(r.stopped_early);
  CHECK(r.levels.size() == 3);  // m = 4, 8, then the limit level
}

TEST_CASE("Hermite interpolation reproduces cubics") {
  const TimeGrid grid(1.0, 8);
  UnfoldedTrajectory z = straight_line(grid, vec({0.0}), vec({1.0}));
  auto p = [](double t) { return 1 + t - 2 * t * t + t * t * t; };
  auto dp = [](double t) { return 1 - 4 * t + 3 * t * t; };
  for (int k = 0; k <= 8; ++k) {
    z.values(k, 0) = p(grid.t(k));
    z.derivs(k, 0) = dp(grid.t(k));
  }
  for (double s : {0.0, 0.01, 0.3333, 0.5, 0.777, 1.0}) {
    CHECK(z.component_at(0, s) == doctest::Approx(p(s)).epsilon(1e-13));
    CHECK(z.component_velocity_at(0, s) == doctest::Approx(dp(s)).epsilon(1e-12));
  }
}
