#include "wavelab/rays.hpp"

#include <algorithm>
#include <cmath>

namespace wavelab {

namespace {

struct Deriv {
  double dt, dtau;
  Vec3 dx, dxi;
};

Deriv flow_rhs(const RayState& s, const Scenario& sc) {
  const MetricField& m = sc.metric;
  double a = m.value(s.t, s.x);
  double at = m.dt ? m.dt(s.t, s.x) : 0.0;
  Vec3 ax = m.grad ? m.grad(s.t, s.x) : Vec3{0, 0, 0};
  double xi2 = dot(s.xi, s.xi);
  Deriv d;
  d.dx = scale(s.xi, 2.0 * a);
  d.dt = -2.0 * s.tau;
  d.dxi = scale(ax, -xi2);
  d.dtau = -at * xi2;
  return d;
}

RayState advance(const RayState& s, const Deriv& d, double h) {
  RayState r = s;
  r.t += h * d.dt;
  r.x = add(r.x, scale(d.dx, h));
  r.tau += h * d.dtau;
  r.xi = add(r.xi, scale(d.dxi, h));
  r.sigma += h;
  return r;
}

}  // namespace

double null_residual(const RayState& s, const Scenario& sc) {
  double a = sc.metric.value(s.t, s.x);
  double xi2 = dot(s.xi, s.xi);
  double H = -s.tau * s.tau + a * xi2;
  return std::abs(H) / std::max(1e-300, s.tau * s.tau + xi2);
}

void renormalize_tau(RayState& s, const Scenario& sc) {
  double a = sc.metric.value(s.t, s.x);
  double mag = std::sqrt(a * dot(s.xi, s.xi));
  s.tau = s.tau < 0 ? -mag : mag;
}

RayState flow_step(const RayState& s, double dsigma, const Scenario& sc) {
  // Classic RK4 on (t, x, tau, xi).
  Deriv k1 = flow_rhs(s, sc);
  RayState s2 = advance(s, k1, 0.5 * dsigma);
  Deriv k2 = flow_rhs(s2, sc);
  RayState s3 = advance(s, k2, 0.5 * dsigma);
  Deriv k3 = flow_rhs(s3, sc);
  RayState s4 = advance(s, k3, dsigma);
  Deriv k4 = flow_rhs(s4, sc);
  RayState out = s;
  out.t += dsigma / 6.0 * (k1.dt + 2 * k2.dt + 2 * k3.dt + k4.dt);
  out.tau += dsigma / 6.0 * (k1.dtau + 2 * k2.dtau + 2 * k3.dtau + k4.dtau);
  for (int d = 0; d < 3; ++d) {
    out.x[d] += dsigma / 6.0 * (k1.dx[d] + 2 * k2.dx[d] + 2 * k3.dx[d] + k4.dx[d]);
    out.xi[d] += dsigma / 6.0 * (k1.dxi[d] + 2 * k2.dxi[d] + 2 * k3.dxi[d] + k4.dxi[d]);
  }
  out.sigma = s.sigma + dsigma;
  return out;
}

RayState reflect(const RayState& s, const SpaceTimeNormal& nu, const Scenario& sc,
                 double grazing_tol) {
  double a = sc.metric.value(s.t, s.x);
  double gnn = -nu.nu_t * nu.nu_t + a * dot(nu.nu_x, nu.nu_x);
  if (gnn <= 0.0)
    throw CheckFailure("reflect: boundary is not timelike for the local metric "
                       "(|nu_t| >= sqrt(a)|nu_x|)");
  double gkn = -s.tau * nu.nu_t + a * dot(s.xi, nu.nu_x);
  double kscale = std::sqrt(s.tau * s.tau + dot(s.xi, s.xi));
  double nscale = std::sqrt(nu.nu_t * nu.nu_t + dot(nu.nu_x, nu.nu_x));
  if (std::abs(gkn) <= grazing_tol * kscale * nscale * std::max(1.0, a))
    throw NumericalError("reflect: grazing incidence, transversality below tolerance");
  double c = 2.0 * gkn / gnn;
  RayState out = s;
  out.tau = s.tau - c * nu.nu_t;
  out.xi = sub(s.xi, scale(nu.nu_x, c));
  if (out.tau * s.tau < 0.0)
    throw NumericalError("reflect: reflection reversed the time direction");
  return out;
}

RayTrajectory trace_ray(RayState init, const Scenario& sc, const TraceOptions& opt) {
  RayTrajectory traj;
  const double rho = sc.metric.flat_radius;
  const double d_tol = opt.boundary_tol_rel * std::max(rho, 1e-6);
  RayState s = init;
  renormalize_tau(s, sc);
  if (sc.obstacle && sc.obstacle->distance(s.t, s.x) < 0.0)
    throw ParameterError("trace_ray: initial point lies inside the obstacle");

  double dsig = opt.dsigma;
  if (dsig <= 0.0) {
    // Aim for ~0.005 time units per step at the current frequency scale.
    dsig = 0.005 / std::max(1e-12, 2.0 * std::abs(s.tau));
  }

  traj.samples.push_back(s);
  long step_count = 0;
  int reflections = 0;
  while (s.t < opt.t_max) {
    if (opt.escape_radius > 0.0 && norm(s.x) > opt.escape_radius) {
      double a = sc.metric.value(s.t, s.x);
      if (dot(s.x, scale(s.xi, 2.0 * a)) > 0.0) {
        traj.stop = RayStop::escaped;
        traj.samples.push_back(s);
        return traj;
      }
    }
    RayState nxt = flow_step(s, dsig, sc);
    renormalize_tau(nxt, sc);
    if (sc.obstacle && sc.obstacle->distance(nxt.t, nxt.x) < 0.0) {
      // Bisect the flow parameter to the boundary crossing.
      double lo = 0.0, hi = dsig;
      RayState hit = nxt;
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        RayState trial = flow_step(s, mid, sc);
        double d = sc.obstacle->distance(trial.t, trial.x);
        if (std::abs(d) <= d_tol) {
          hit = trial;
          break;
        }
        (d > 0.0 ? lo : hi) = mid;
        hit = trial;
        if (it == 199) hit = flow_step(s, lo, sc);  // stay on the outside
      }
      SpaceTimeNormal nu;
      try {
        nu = boundary_normal(*sc.obstacle, hit.t, hit.x, std::max(10.0 * d_tol, 1e-9));
        RayState refl = reflect(hit, nu, sc, 1e-8);
        renormalize_tau(refl, sc);
        ReflectionEvent ev;
        ev.t = hit.t;
        ev.x = hit.x;
        ev.tau_in = hit.tau;
        ev.xi_in = hit.xi;
        ev.tau_out = refl.tau;
        ev.xi_out = refl.xi;
        ev.normal = nu;
        traj.events.push_back(ev);
        traj.samples.push_back(refl);
        s = refl;
        // March the outgoing ray clear of the boundary.
        int push = 0;
        while (sc.obstacle->distance(s.t, s.x) < d_tol && push < 64) {
          s = flow_step(s, dsig * 0.05, sc);
          ++push;
        }
        if (push >= 64) {
          traj.stop = RayStop::grazing;
          return traj;
        }
      } catch (const NumericalError&) {
        traj.stop = RayStop::grazing;
        return traj;
      }
      ++reflections;
      if (reflections > opt.max_reflections) {
        traj.stop = RayStop::max_reflections;
        traj.suspected_trapping = true;
        return traj;
      }
      continue;
    }
    s = nxt;
    if (++step_count % opt.sample_stride == 0) traj.samples.push_back(s);
  }
  traj.stop = RayStop::time_budget;
  traj.samples.push_back(s);
  return traj;
}

NonTrappingReport nontrapping_scan(const Scenario& sc, const ScanOptions& opt) {
  NonTrappingReport rep;
  rep.radius = opt.radius;
  const int dim = sc.dim();
  std::mt19937_64 rng(opt.seed);

  std::vector<Vec3> dirs;
  if (dim == 1) {
    dirs.push_back({1, 0, 0});
    dirs.push_back({-1, 0, 0});
  } else if (dim == 2) {
    for (int i = 0; i < opt.direction_samples; ++i) {
      double ang = 2.0 * M_PI * i / opt.direction_samples;
      dirs.push_back({std::cos(ang), std::sin(ang), 0});
    }
  } else {
    for (int i = 0; i < opt.direction_samples; ++i) {
      double z = -1.0 + 2.0 * (i + 0.5) / opt.direction_samples;
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      double phi = 2.399963229728653 * i;
      dirs.push_back({r * std::cos(phi), r * std::sin(phi), z});
    }
  }

  TraceOptions topt;
  topt.escape_radius = opt.radius;
  topt.max_reflections = opt.max_reflections;

  for (int it = 0; it < opt.time_samples; ++it) {
    double t0 = sc.period() * it / opt.time_samples;
    topt.t_max = t0 + opt.t_budget;
    for (int ip = 0; ip < opt.point_samples; ++ip) {
      Vec3 x0{0, 0, 0};
      for (int trial = 0; trial < 64; ++trial) {
        for (int d = 0; d < dim; ++d) x0[d] = uniform(rng, -opt.radius, opt.radius);
        if (norm(x0) > opt.radius) continue;
        if (sc.obstacle && sc.obstacle->distance(t0, x0) < 0.05 * opt.radius) continue;
        break;
      }
      for (const auto& u : dirs) {
        RayState s0;
        s0.t = t0;
        s0.x = x0;
        s0.xi = u;
        s0.tau = -1.0;
        RayTrajectory tr = trace_ray(s0, sc, topt);
        if (tr.stop == RayStop::grazing) {
          ++rep.grazing_discards;
          continue;
        }
        ++rep.samples;
        if (tr.stop == RayStop::escaped) {
          rep.t1_estimate = std::max(rep.t1_estimate, tr.samples.back().t - t0);
        } else {
          rep.witnesses.push_back(std::move(tr));
        }
      }
    }
  }
  return rep;
}

}  // namespace wavelab
