#include "wavelab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wavelab {

namespace {

constexpr double kFdStep = 1e-6;

void require_finite(double v, const char* what, double t, const Vec3& x) {
  if (!std::isfinite(v)) {
    throw ParameterError(std::string("malformed scenario: non-finite ") + what +
                         " at t=" + std::to_string(t) + " x=(" + std::to_string(x[0]) + "," +
                         std::to_string(x[1]) + "," + std::to_string(x[2]) + ")");
  }
}

}  // namespace

double obstacle_dt(const ObstacleMotion& o, double t, const Vec3& x) {
  return (o.distance(t + kFdStep, x) - o.distance(t - kFdStep, x)) / (2.0 * kFdStep);
}

Vec3 obstacle_grad(const ObstacleMotion& o, double t, const Vec3& x) {
  Vec3 g{0, 0, 0};
  for (int d = 0; d < 3; ++d) {
    Vec3 xp = x, xm = x;
    xp[d] += kFdStep;
    xm[d] -= kFdStep;
    g[d] = (o.distance(t, xp) - o.distance(t, xm)) / (2.0 * kFdStep);
  }
  return g;
}

SpaceTimeNormal boundary_normal(const ObstacleMotion& o, double t, const Vec3& x, double tol) {
  double d = o.distance(t, x);
  require_finite(d, "signed distance", t, x);
  if (std::abs(d) > tol)
    throw ParameterError("boundary_normal: point is not on the boundary (|d|=" +
                         std::to_string(std::abs(d)) + " > tol)");
  double dt = obstacle_dt(o, t, x);
  Vec3 gx = obstacle_grad(o, t, x);
  double gn = norm(gx);
  if (gn < 1e-8)
    throw ParameterError("boundary_normal: degenerate spatial gradient");
  double mag = std::sqrt(dt * dt + gn * gn);
  return {dt / mag, scale(gx, 1.0 / mag)};
}

ValidationReport validate_scenario(const Scenario& s, const SamplingSpec& spec) {
  ValidationReport rep;
  const MetricField& m = s.metric;
  const double T = m.period;
  const double rho = m.flat_radius;
  const int nt = std::max(2, spec.time_samples);
  const int ns = std::max(3, spec.space_samples);
  const double box = rho + 1.0;

  auto sample_axis = [&](int i) { return -box + 2.0 * box * i / (ns - 1); };

  // Metric bounds and flatness over the sampling box, periodicity at paired times.
  CheckResult lower{"metric_lower_bound", true, std::numeric_limits<double>::infinity()};
  CheckResult upper{"metric_upper_bound", true, std::numeric_limits<double>::infinity()};
  CheckResult flat{"metric_flat_outside_rho", true, 0.0};
  CheckResult periodic{"metric_time_periodic", true, 0.0};
  flat.margin = 0.0;
  double worst_flat = 0.0, worst_per = 0.0;

  for (int it = 0; it < nt; ++it) {
    double t = T * it / nt;
    for (int i = 0; i < ns; ++i) {
      for (int j = 0; j < (m.dim >= 2 ? ns : 1); ++j) {
        for (int k = 0; k < (m.dim >= 3 ? ns : 1); ++k) {
          Vec3 x{sample_axis(i), m.dim >= 2 ? sample_axis(j) : 0.0,
                 m.dim >= 3 ? sample_axis(k) : 0.0};
          double a = m.value(t, x);
          require_finite(a, "metric", t, x);
          if (a - m.lower_bound < lower.margin) {
            lower.margin = a - m.lower_bound;
            lower.t = t;
            lower.x = x;
          }
          if (m.upper_bound - a < upper.margin) {
            upper.margin = m.upper_bound - a;
            upper.t = t;
            upper.x = x;
          }
          if (norm(x) >= rho) {
            double dev = std::abs(a - 1.0);
            if (dev > worst_flat) {
              worst_flat = dev;
              flat.t = t;
              flat.x = x;
            }
          }
          double ap = m.value(t + T, x);
          require_finite(ap, "metric", t + T, x);
          double dev = std::abs(ap - a);
          if (dev > worst_per) {
            worst_per = dev;
            periodic.t = t;
            periodic.x = x;
          }
        }
      }
    }
  }
  lower.passed = lower.margin >= 0.0;
  upper.passed = upper.margin >= 0.0;
  flat.margin = -worst_flat;
  flat.passed = worst_flat <= spec.tolerance;
  periodic.margin = -worst_per;
  periodic.passed = worst_per <= spec.tolerance;
  lower.detail = "min(a - c) over samples";
  upper.detail = "min(C - a) over samples";
  flat.detail = "-max|a - 1| for |x| >= rho";
  periodic.detail = "-max|a(t+T,x) - a(t,x)|";
  rep.checks.push_back(lower);
  rep.checks.push_back(upper);
  rep.checks.push_back(flat);
  rep.checks.push_back(periodic);

  if (s.obstacle) {
    const ObstacleMotion& o = *s.obstacle;
    CheckResult conf{"obstacle_inside_rho1", true, std::numeric_limits<double>::infinity()};
    CheckResult opd{"obstacle_time_periodic", true, 0.0};
    CheckResult relp{"rho1_below_rho", o.bound_radius < rho, rho - o.bound_radius};
    CheckResult speed{"boundary_normal_speed", true, std::numeric_limits<double>::infinity()};
    double worst_opd = 0.0;

    for (int it = 0; it < nt; ++it) {
      double t = T * it / nt;
      // Confinement: d must be positive on and outside the rho1 sphere.
      for (int id = 0; id < spec.boundary_directions; ++id) {
        Vec3 u = {0, 0, 0};
        if (m.dim == 1) {
          u[0] = (id % 2 == 0) ? 1.0 : -1.0;
        } else {
          double z = m.dim >= 3 ? -1.0 + 2.0 * (id + 0.5) / spec.boundary_directions : 0.0;
          double r = std::sqrt(std::max(0.0, 1.0 - z * z));
          double phi = 2.399963229728653 * id;  // golden angle
          u = {r * std::cos(phi), r * std::sin(phi), z};
          if (m.dim == 2) {
            double ang = 2.0 * M_PI * id / spec.boundary_directions;
            u = {std::cos(ang), std::sin(ang), 0.0};
          }
        }
        for (double rr : {o.bound_radius, o.bound_radius * 1.25, box}) {
          Vec3 x = scale(u, rr);
          double d = o.distance(t, x);
          require_finite(d, "signed distance", t, x);
          if (d < conf.margin) {
            conf.margin = d;
            conf.t = t;
            conf.x = x;
          }
          double dp = o.distance(t + T, x);
          require_finite(dp, "signed distance", t + T, x);
          double dev = std::abs(dp - d);
          if (dev > worst_opd) {
            worst_opd = dev;
            opd.t = t;
            opd.x = x;
          }
        }
      }
      // Boundary sampling: march from each interior seed along direction u to
      // the sign change, bisect, and check the normal speed there.
      auto seeds = o.seeds ? o.seeds(t) : std::vector<Vec3>{};
      for (const auto& seed : seeds) {
        if (o.distance(t, seed) >= 0.0) continue;  // seed fell outside; skip
        for (int id = 0; id < spec.boundary_directions; ++id) {
          Vec3 u{0, 0, 0};
          if (m.dim == 1) {
            if (id >= 2) break;
            u[0] = (id == 0) ? 1.0 : -1.0;
          } else if (m.dim == 2) {
            double ang = 2.0 * M_PI * id / spec.boundary_directions;
            u = {std::cos(ang), std::sin(ang), 0.0};
          } else {
            double z = -1.0 + 2.0 * (id + 0.5) / spec.boundary_directions;
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            double phi = 2.399963229728653 * id;
            u = {r * std::cos(phi), r * std::sin(phi), z};
          }
          double lo = 0.0, hi = 2.0 * o.bound_radius;
          if (o.distance(t, add(seed, scale(u, hi))) <= 0.0) continue;
          for (int b = 0; b < 60; ++b) {
            double mid = 0.5 * (lo + hi);
            (o.distance(t, add(seed, scale(u, mid))) < 0.0 ? lo : hi) = mid;
          }
          Vec3 xb = add(seed, scale(u, hi));
          double ddt = obstacle_dt(o, t, xb);
          Vec3 g = obstacle_grad(o, t, xb);
          double gn = norm(g);
          if (gn < 1e-8) continue;  // corner of a union; measured elsewhere
          double margin = o.speed_ratio * gn - std::abs(ddt);
          if (margin < speed.margin) {
            speed.margin = margin;
            speed.t = t;
            speed.x = xb;
          }
        }
      }
    }
    conf.passed = conf.margin > 0.0;
    conf.detail = "min d(t,x) on |x| >= rho1";
    opd.margin = -worst_opd;
    opd.passed = worst_opd <= spec.tolerance;
    opd.detail = "-max|d(t+T,x) - d(t,x)|";
    relp.detail = "rho - rho1";
    if (!std::isfinite(speed.margin)) speed.margin = 0.0;  // no boundary sampled
    speed.passed = speed.margin > 0.0 || !o.seeds;
    speed.detail = "min(kappa |nu_x| - |nu_t|) over boundary samples";
    rep.checks.push_back(conf);
    rep.checks.push_back(opd);
    rep.checks.push_back(relp);
    rep.checks.push_back(speed);

    if (std::abs(o.period - T) > spec.tolerance * std::max(1.0, T)) {
      rep.checks.push_back(
          {"periods_equal", false, -(std::abs(o.period - T)), 0.0, {0, 0, 0},
           "metric and obstacle periods differ"});
    } else {
      rep.checks.push_back({"periods_equal", true, 0.0, 0.0, {0, 0, 0}, ""});
    }
  }
  return rep;
}

Scenario glued_scenario(const GluedFamily& f) {
  if (f.total_period < f.splice_time)
    throw ParameterError("glued_scenario: total period T must be >= splice time T1");
  if (f.splice_time <= 0.0)
    throw ParameterError("glued_scenario: splice time T1 must be positive");
  if (f.static_metric.time_dependent)
    throw ParameterError("glued_scenario: base metric must be static");

  const MetricField a1 = f.static_metric;
  const double T1 = f.splice_time;
  const double T = f.total_period;
  const double amp = f.transient_amplitude;
  const double rad = f.transient_radius;

  MetricField m = a1;
  m.period = T;
  m.time_dependent = amp != 0.0;
  m.static_from = amp != 0.0 ? T1 : 0.0;
  m.identically_one = a1.identically_one && amp == 0.0;
  m.flat_radius = std::max(a1.flat_radius, amp != 0.0 ? rad : 0.0);
  // Bounds widen by the transient peak. splice_window has max 1.
  m.lower_bound = std::min(a1.lower_bound, a1.lower_bound + std::min(0.0, amp));
  m.upper_bound = std::max(a1.upper_bound, a1.upper_bound + std::max(0.0, amp));

  auto phase = [T](double t) {
    double tau = std::fmod(t, T);
    if (tau < 0.0) tau += T;
    return tau;
  };
  m.value = [a1, amp, rad, T1, phase](double t, const Vec3& x) {
    double tau = phase(t);
    if (tau >= T1 || amp == 0.0) return a1.value(tau, x);
    double w = splice_window(tau / T1);
    return a1.value(tau, x) + amp * w * bump(norm(x) / rad);
  };
  m.dt = [a1, amp, rad, T1, phase](double t, const Vec3& x) {
    double tau = phase(t);
    double base = a1.dt ? a1.dt(tau, x) : 0.0;
    if (tau >= T1 || amp == 0.0) return base;
    return base + amp * splice_window_dq(tau / T1) / T1 * bump(norm(x) / rad);
  };
  m.grad = [a1, amp, rad, T1, phase](double t, const Vec3& x) {
    double tau = phase(t);
    Vec3 base = a1.grad ? a1.grad(tau, x) : Vec3{0, 0, 0};
    if (tau >= T1 || amp == 0.0) return base;
    double r = norm(x);
    if (r < 1e-14) return base;
    double c = amp * splice_window(tau / T1) * bump_ds(r / rad) / rad / r;
    return add(base, scale(x, c));
  };

  Scenario s;
  s.metric = m;
  if (f.obstacle) {
    ObstacleMotion o = *f.obstacle;
    o.period = T;
    s.obstacle = o;
  }
  s.label = "glued";
  s.notes = "splice T1=" + std::to_string(T1) + " T=" + std::to_string(T);
  return s;
}

}  // namespace wavelab
