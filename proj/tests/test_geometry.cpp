#include <doctest.h>

#include <cmath>

#include "wavelab/geometry.hpp"
#include "wavelab/scenario_library.hpp"

using namespace wavelab;

namespace {

Scenario sin_bump_scenario(double T, double amp, double rho) {
  IniDoc doc;
  doc.set("metric", "kind", "sin-bump");
  doc.set("metric", "dim", "3");
  doc.set("metric", "period", fmt_g17(T));
  doc.set("metric", "amplitude", fmt_g17(amp));
  doc.set("metric", "width", fmt_g17(rho));
  doc.set("metric", "rho", fmt_g17(rho));
  return scenario_from_ini(doc);
}

}  // namespace

TEST_CASE("identity metric validates with zero margins") {
  Scenario s = builtin_scenario("free");
  ValidationReport rep = validate_scenario(s);
  CHECK(rep.all_passed());
  for (const auto& c : rep.checks) {
    if (c.name == "metric_lower_bound" || c.name == "metric_upper_bound")
      CHECK(c.margin == doctest::Approx(0.0));
  }
}

TEST_CASE("time-modulated bump: bounds, flatness, periodicity") {
  Scenario s = sin_bump_scenario(1.0, 0.5, 1.0);
  CHECK(s.metric.lower_bound == doctest::Approx(0.5));
  CHECK(s.metric.upper_bound == doctest::Approx(1.5));
  ValidationReport rep = validate_scenario(s);
  CHECK(rep.all_passed());

  // Direct evaluation of the closed form at sample points.
  for (double t : {0.13, 0.57, 0.91}) {
    for (double r : {0.0, 0.35, 0.8, 1.0, 1.7}) {
      Vec3 x{r, 0, 0};
      double expect = 1.0 + 0.5 * std::sin(2 * M_PI * t) * bump(r);
      CHECK(s.metric.value(t, x) == doctest::Approx(expect).epsilon(1e-14));
    }
  }
  // Exact flatness outside rho.
  CHECK(s.metric.value(0.3, {1.0, 0.2, 0}) == 1.0);
  CHECK(s.metric.value(0.77, {2.5, 0, 0}) == 1.0);
}

TEST_CASE("translating ball fails the normal-speed check when too fast") {
  // d(t,x) = |x - 0.3 sin(2 pi t / T) e1| - 0.2 with T = 1: peak speed
  // 0.3 * 2 pi = 1.885 > kappa for any kappa < 1.
  IniDoc doc;
  doc.set("metric", "kind", "identity");
  doc.set("metric", "dim", "3");
  doc.set("metric", "period", "1.0");
  doc.set("metric", "rho", "1.0");
  doc.set("obstacle", "kind", "moving-ball");
  doc.set("obstacle", "swing", "0.3");
  doc.set("obstacle", "radius", "0.2");
  doc.set("obstacle", "speed_ratio", "0.99");
  doc.set("obstacle", "rho1", "0.6");
  Scenario fast = scenario_from_ini(doc);
  ValidationReport rep = validate_scenario(fast);
  bool found = false;
  for (const auto& c : rep.checks) {
    if (c.name == "boundary_normal_speed") {
      found = true;
      CHECK_FALSE(c.passed);
      CHECK(c.margin < 0.0);
      // the report names a violating point on the boundary
      CHECK(std::abs(fast.obstacle->distance(c.t, c.x)) < 1e-6);
    }
  }
  CHECK(found);

  // Same motion over a long period is slow enough: 0.3 * 2 pi / 8 = 0.236.
  doc.set("metric", "period", "8.0");
  doc.set("obstacle", "speed_ratio", "0.5");
  Scenario slow = scenario_from_ini(doc);
  CHECK(validate_scenario(slow).all_passed());
}

TEST_CASE("malformed scenario raises") {
  Scenario s = builtin_scenario("free");
  s.metric.value = [](double, const Vec3&) { return std::nan(""); };
  CHECK_THROWS_AS(validate_scenario(s), ParameterError);
}

TEST_CASE("boundary normals: static, translating, pulsating balls") {
  // Static ball: nu_t = 0, nu_x radial.
  IniDoc doc;
  doc.set("metric", "kind", "identity");
  doc.set("metric", "dim", "3");
  doc.set("metric", "period", "1.0");
  doc.set("metric", "rho", "1.0");
  doc.set("obstacle", "kind", "ball");
  doc.set("obstacle", "radius", "0.25");
  doc.set("obstacle", "rho1", "0.5");
  Scenario s = scenario_from_ini(doc);
  Vec3 p{0.25, 0, 0};
  SpaceTimeNormal nu = boundary_normal(*s.obstacle, 0.3, p, 1e-9);
  CHECK(nu.nu_t == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(nu.nu_x[0] == doctest::Approx(1.0).epsilon(1e-6));
  double mag = std::sqrt(nu.nu_t * nu.nu_t + dot(nu.nu_x, nu.nu_x));
  CHECK(mag == doctest::Approx(1.0).epsilon(1e-12));

  // Translating ball: nu_t / |nu_x| = -zdot . nhat.
  doc.set("obstacle", "kind", "moving-ball");
  doc.set("obstacle", "swing", "0.1");
  doc.set("metric", "period", "4.0");
  Scenario mv = scenario_from_ini(doc);
  double t = 0.7;
  double zc = 0.1 * std::sin(2 * M_PI * t / 4.0);
  double zdot = 0.1 * (2 * M_PI / 4.0) * std::cos(2 * M_PI * t / 4.0);
  Vec3 pb{zc + 0.25, 0, 0};  // boundary point on the +x side, nhat = e1
  SpaceTimeNormal nm = boundary_normal(*mv.obstacle, t, pb, 1e-9);
  CHECK(nm.nu_t / norm(nm.nu_x) == doctest::Approx(-zdot).epsilon(1e-4));

  // Pulsating ball: nu_t / |nu_x| = -rdot.
  doc.set("obstacle", "kind", "pulsating-ball");
  doc.set("obstacle", "radius", "0.25");
  doc.set("obstacle", "pulse", "0.05");
  Scenario pu = scenario_from_ini(doc);
  double rt = 0.25 + 0.05 * std::sin(2 * M_PI * t / 4.0);
  double rdot = 0.05 * (2 * M_PI / 4.0) * std::cos(2 * M_PI * t / 4.0);
  Vec3 pp{0, rt, 0};
  SpaceTimeNormal np = boundary_normal(*pu.obstacle, t, pp, 1e-9);
  CHECK(np.nu_t / norm(np.nu_x) == doctest::Approx(-rdot).epsilon(1e-4));
  // orientation: spatial normal points out of the obstacle
  CHECK(np.nu_x[1] > 0.0);
}

TEST_CASE("degenerate gradient raises") {
  Scenario s = builtin_scenario("two-ball-trap");
  ObstacleMotion flat = *s.obstacle;
  flat.distance = [](double, const Vec3&) { return 0.0; };
  CHECK_THROWS_AS(boundary_normal(flat, 0.0, {0, 0, 0}, 1e-6), ParameterError);
}

TEST_CASE("glued family: zero transient is the static pair everywhere") {
  IniDoc doc = parse_ini_text(builtin_config_text("glued-T4"), "builtin");
  GluedFamily fam = glued_family_from_ini(doc);
  fam.transient_amplitude = 0.0;
  Scenario g = glued_scenario(fam);
  for (double t : {0.0, 0.1, 0.49, 0.5, 1.0, 1.9}) {
    for (double r : {0.0, 0.4, 0.9, 1.3}) {
      Vec3 x{r, 0.1, -0.2};
      CHECK(g.metric.value(t, x) == fam.static_metric.value(0.0, x));
    }
  }
}

TEST_CASE("glued family: static window is bit-identical to a1") {
  IniDoc doc = parse_ini_text(builtin_config_text("glued-T4"), "builtin");
  GluedFamily fam = glued_family_from_ini(doc);
  REQUIRE(fam.transient_amplitude != 0.0);
  Scenario g = glued_scenario(fam);
  const double T1 = fam.splice_time, T = fam.total_period;
  CHECK(g.metric.static_from == T1);
  // On [T1, T]: exactly the static evaluator, bitwise.
  for (double t : {T1, 0.5 * (T1 + T), 2.0 * T1, T * 0.999}) {
    for (double r : {0.0, 0.3, 0.8, 1.2}) {
      Vec3 x{0.1, r, 0.05};
      CHECK(g.metric.value(t, x) == fam.static_metric.value(0.0, x));
    }
  }
  // Inside the transient window the metric differs somewhere.
  bool differs = false;
  for (double t : {0.1 * T1, 0.5 * T1, 0.9 * T1})
    if (g.metric.value(t, {0.2, 0, 0}) != fam.static_metric.value(0.0, {0.2, 0, 0}))
      differs = true;
  CHECK(differs);
  CHECK(validate_scenario(g).all_passed());
}

TEST_CASE("glued family: T = T1 boundary case builds and validates") {
  IniDoc doc = parse_ini_text(builtin_config_text("glued-T1"), "builtin");
  GluedFamily fam = glued_family_from_ini(doc);
  CHECK(fam.total_period == doctest::Approx(fam.splice_time));
  Scenario g = glued_scenario(fam);
  CHECK(validate_scenario(g).all_passed());
  // T < T1 is a parameter error.
  fam.total_period = 0.5 * fam.splice_time;
  CHECK_THROWS_AS(glued_scenario(fam), ParameterError);
}

TEST_CASE("scenario file parsing errors carry line numbers") {
  CHECK_THROWS_WITH_AS(parse_ini_text("[metric]\nkind identity\n", "f.ini"),
                       doctest::Contains("f.ini:2"), ParameterError);
  CHECK_THROWS_AS(parse_ini_text("key = 1\n", "g.ini"), ParameterError);
}

TEST_CASE("builtin library round-trips through the parser") {
  for (const auto& name : builtin_names()) {
    Scenario s = builtin_scenario(name);
    CHECK(s.label == name);
    CHECK(s.dim() >= 1);
    ValidationReport rep = validate_scenario(s);
    CHECK(rep.all_passed());
  }
}
