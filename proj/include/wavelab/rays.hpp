#pragma once

#include <optional>
#include <vector>

#include "wavelab/geometry.hpp"

namespace wavelab {

// Space-time bicharacteristic state for H = -tau^2 + a(t,x)|xi|^2.
struct RayState {
  double t = 0.0;
  Vec3 x{0, 0, 0};
  double tau = -1.0;  // negative tau moves forward in time
  Vec3 xi{1, 0, 0};
  double sigma = 0.0;  // flow parameter
};

struct ReflectionEvent {
  double t = 0.0;
  Vec3 x{0, 0, 0};
  double tau_in = 0.0, tau_out = 0.0;
  Vec3 xi_in{0, 0, 0}, xi_out{0, 0, 0};
  SpaceTimeNormal normal;
};

enum class RayStop { time_budget, escaped, max_reflections, grazing };

struct RayTrajectory {
  std::vector<RayState> samples;
  std::vector<ReflectionEvent> events;
  RayStop stop = RayStop::time_budget;
  bool suspected_trapping = false;
};

struct NonTrappingReport {
  double radius = 0.0;
  int samples = 0;
  double t1_estimate = 0.0;             // max escape time over escaped rays
  std::vector<RayTrajectory> witnesses; // rays that never escaped
  int grazing_discards = 0;
};

// Hamiltonian residual -tau^2 + a|xi|^2, normalized by tau^2 + |xi|^2.
double null_residual(const RayState& s, const Scenario& sc);
// Rescales tau (sign kept) onto the null set.
void renormalize_tau(RayState& s, const Scenario& sc);

// One RK4 step of the bicharacteristic flow; no boundary handling.
RayState flow_step(const RayState& s, double dsigma, const Scenario& sc);

// Lorentzian specular reflection with pairing G(k,k') = -tau tau' + a xi.xi'.
// Throws CheckFailure when G(nu,nu) <= 0 (boundary not timelike) and
// NumericalError for grazing incidence below the transversality tolerance.
RayState reflect(const RayState& s, const SpaceTimeNormal& nu, const Scenario& sc,
                 double grazing_tol = 1e-10);

struct TraceOptions {
  double dsigma = 0.0;        // 0: auto from |xi|
  double t_max = 50.0;
  double escape_radius = 0.0; // 0: no escape stop
  int max_reflections = 64;
  int sample_stride = 8;      // trajectory decimation
  double boundary_tol_rel = 1e-10;  // times rho
};

RayTrajectory trace_ray(RayState init, const Scenario& sc, const TraceOptions& opt);

struct ScanOptions {
  double radius = 2.0;
  int time_samples = 4;       // t0 over [0, T)
  int point_samples = 8;      // x0 inside the ball
  int direction_samples = 12;
  double t_budget = 60.0;
  int max_reflections = 64;
  std::uint64_t seed = 777;
};

NonTrappingReport nontrapping_scan(const Scenario& sc, const ScanOptions& opt);

}  // namespace wavelab
