#include <doctest.h>

#include <cmath>
#include <random>

#include "bbvp/error.hpp"
#include "bbvp/forces.hpp"

using namespace bbvp;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("f* examples") {
  const BoxDomain box = BoxDomain::anchored(vec({1, 1}));
  CHECK(extend_f_star(zero_field(2, 1.0), box, 0.3, vec({5.3, -2.7})).isZero(0.0));
  const ForceField ones = constant_field(vec({1, 1}), 1.0);
  CHECK(extend_f_star(ones, box, 0.0, vec({0.5, 1.5})) == vec({1, -1}));
  const ForceField linear(2, 1.0, [](double, const Vec& x) { return vec({x[0], 0.0}); }, 1.0);
  const Vec f = extend_f_star(linear, box, 0.0, vec({1.25, 0.5}));
  CHECK(f[0] == doctest::Approx(-0.75));
  CHECK(f[1] == 0.0);
  // Grid-line components vanish.
  CHECK(extend_f_star(ones, box, 0.0, vec({2.0, 0.5}))[0] == 0.0);
}

TEST_CASE("eta ramp") {
  const BoxDomain box = BoxDomain::anchored(vec({1}));
  CHECK(eta(box, 0, 0.0, 2) == 0.0);
  CHECK(eta(box, 0, 1.0, 2) == 0.0);
  CHECK(eta(box, 0, 0.5, 2) == 1.0);
  CHECK(eta(box, 0, 0.125, 2) == doctest::Approx(0.5));
  CHECK(eta(box, 0, 0.875, 2) == doctest::Approx(0.5));
  CHECK_THROWS_AS(eta(box, 0, 1.5, 2), Error);
  CHECK_THROWS_AS(eta(box, 0, 0.5, 0), Error);
}

TEST_CASE("g*_m examples") {
  const BoxDomain box1 = BoxDomain::anchored(vec({1}));
  const ForceField one = constant_field(vec({1}), 1.0);
  CHECK(g_star(one, box1, 0.0, vec({2.125}), 2)[0] == doctest::Approx(0.5));
  CHECK(g_star(one, box1, 0.0, vec({3.0}), 2)[0] == 0.0);
  const BoxDomain box = BoxDomain::anchored(vec({1, 2}));
  const ForceField f = constant_field(vec({0.3, -0.4}), 1.0);
  const Vec z = vec({0.5, 3.0});
  CHECK(g_star(f, box, 0.0, z, 8) == extend_f_star(f, box, 0.0, z));
}

TEST_CASE("g* in cells gives one-sided limits") {
  const BoxDomain box = BoxDomain::anchored(vec({1}));
  const ForceField one = constant_field(vec({1}), 1.0);
  CHECK(g_star_in_cells(one, box, 0.0, vec({1.0}), {0}, std::nullopt)[0] == 1.0);
  CHECK(g_star_in_cells(one, box, 0.0, vec({1.0}), {1}, std::nullopt)[0] == -1.0);
  CHECK(g_star_in_cells(one, box, 0.0, vec({1.0}), {0}, 4)[0] == 0.0);
}

TEST_CASE("property: f* periodicity, reflection antisymmetry, g* <= f* <= m") {
  const Vec c = vec({0.8, 1.7});
  const BoxDomain box = BoxDomain::anchored(c);
  const ForceField field(
      2, 1.0,
      [](double t, const Vec& x) {
        return vec({std::sin(3 * x[0] + t) * 0.9, std::cos(x[0] * x[1]) * 0.4});
      },
      1.0);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  std::uniform_int_distribution<int> k(-5, 5);
  std::uniform_int_distribution<int> level(1, 64);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec z = vec({u(rng), u(rng)});
    const double t = 0.5 * (1 + u(rng) / 8);
    const Vec f = extend_f_star(field, box, t, z);
    const Vec shift = vec({2 * c[0] * k(rng), 2 * c[1] * k(rng)});
    CHECK((extend_f_star(field, box, t, z + shift) - f).cwiseAbs().maxCoeff() <= 1e-12);
    for (int i = 0; i < 2; ++i) {
      if (box.on_grid_line(i, z[i])) continue;
      Vec r = z;
      r[i] = 2 * c[i] - z[i];
      CHECK(extend_f_star(field, box, t, r)[i] == doctest::Approx(-f[i]).epsilon(1e-9));
    }
    const Vec g = g_star(field, box, t, z, level(rng));
    CHECK(g.norm() <= f.norm() + 1e-15);
    CHECK(f.norm() <= field.bound(t));
  }
}

TEST_CASE("property: the ramp plateau covers 1 - 1/m of each cell") {
  const BoxDomain box = BoxDomain::anchored(vec({2.0}));
  for (int m : {1, 3, 16}) {
    const int samples = 200000;
    int plateau = 0;
    for (int j = 0; j < samples; ++j) {
      plateau += eta(box, 0, 2.0 * (j + 0.5) / samples, m) == 1.0;
    }
    CHECK(static_cast<double>(plateau) / samples == doctest::Approx(1.0 - 1.0 / m).epsilon(1e-4));
  }
}

TEST_CASE("uneven table force") {
  const PotentialTable table = gaussian_dimple(9.81);
  CHECK(table_acceleration(table, 0.0, 0.0).isZero(0.0));
  const BoxDomain square(vec({-2, -2}), vec({2, 2}));
  const ForceField f = table_force(table, square, 1.0);
  CHECK(f.bound(0.0) <= 9.81 / 2);
  CHECK(audit_bound(f, square, 4096).pass);

  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double x = u(rng);
    const double y = u(rng);
    const Eigen::Vector2d a = table_acceleration(table, x, y);
    CHECK(a.norm() <= 9.81 / 2);
    CHECK((a + table_acceleration(table, -x, -y)).norm() <= 1e-14);
  }

  SUBCASE("finite-difference gradient matches the analytic one") {
    PotentialTable numeric = table;
    numeric.gradient = nullptr;
    for (int trial = 0; trial < 200; ++trial) {
      const double x = u(rng);
      const double y = u(rng);
      CHECK((table_gradient(numeric, x, y) - table_gradient(table, x, y)).norm() < 1e-8);
    }
  }
  SUBCASE("the analytic cap g/2 is an explicit bound choice") {
    const ForceField capped = table_force(table, square, 1.0, 9.81 / 2);
    CHECK(capped.bound_integral() == doctest::Approx(4.905));
  }
}

TEST_CASE("bound audit") {
  const BoxDomain box = BoxDomain::anchored(vec({1, 1}));
  const ForceField zero(2, 1.0, [](double, const Vec&) { return Vec(Vec::Zero(2)); }, 1.0);
  const BoundAudit ok = audit_bound(zero, box, 100);
  CHECK(ok.pass);
  CHECK(ok.min_slack == doctest::Approx(1.0));
  const ForceField bad(2, 1.0, [](double, const Vec&) { return vec({2, 0}); }, 1.0);
  try {
    audit_bound(bad, box, 100);
    FAIL("expected BoundViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BoundViolation);
  }
}

TEST_CASE("bound integral of a time profile") {
  const ForceField f(1, 2.0, [](double, const Vec&) { return vec({0.0}); },
                     [](double) { return 3.0; }, 64);
  CHECK(f.bound_integral() == doctest::Approx(6.0));
  const ForceField ramp(1, 1.0, [](double, const Vec&) { return vec({0.0}); },
                        [](double t) { return t; }, 1000);
  CHECK(ramp.bound_integral() >= 0.5);
  CHECK(ramp.bound_integral() == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("field registry") {
  auto& reg = FieldRegistry::global();
  CHECK(reg.contains("zero"));
  CHECK(reg.contains("constant"));
  CHECK(reg.contains("table:gaussian-dimple"));
  const BoxDomain box = BoxDomain::anchored(vec({1, 1}));
  FieldSpec spec;
  spec.name = "constant";
  spec.params["value"] = "0.5 -1";
  const ForceField f = reg.make(spec, box, 2.0);
  CHECK(f(0.0, vec({0.5, 0.5})) == vec({0.5, -1}));
  CHECK(f.bound_integral() == doctest::Approx(2.0 * std::sqrt(1.25)));

  reg.add("swirl", [](const FieldSpec&, const BoxDomain& b, double T) {
    return ForceField(b.dim(), T, [](double, const Vec& x) { return vec({-x[1], x[0]}); }, 2.0);
  });
  FieldSpec custom;
  custom.name = "custom";
  custom.params["custom"] = "swirl";
  CHECK(reg.make(custom, box, 1.0)(0.0, vec({1, 0})) == vec({0, 1}));

  FieldSpec unknown;
  unknown.name = "nope";
  CHECK_THROWS_AS(reg.make(unknown, box, 1.0), Error);
  spec.params["value"] = "1 2 3";
  CHECK_THROWS_AS(reg.make(spec, box, 1.0), Error);
}

TEST_CASE("shifted field") {
  const ForceField f(1, 1.0, [](double, const Vec& x) { return x; }, 10.0);
  CHECK(f.shifted(vec({2.0}))(0.0, vec({1.0}))[0] == 3.0);
}
