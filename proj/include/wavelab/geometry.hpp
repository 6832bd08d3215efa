#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wavelab/common.hpp"

namespace wavelab {

// Scalar metric a(t,x): T-periodic in t, equal to 1 outside |x| >= flat_radius,
// pinched between lower_bound and upper_bound. Callables must be pure.
struct MetricField {
  int dim = 3;
  double period = 1.0;
  double flat_radius = 1.0;   // rho
  double lower_bound = 1.0;   // c
  double upper_bound = 1.0;   // C
  bool time_dependent = false;
  bool identically_one = true;
  // a(t,.) is t-independent for t mod period in [static_from, period]; 0 for
  // fully static metrics, period when no static window exists. Lets schedule
  // builders share coefficient arrays bit-identically across that window.
  double static_from = 0.0;
  std::function<double(double, const Vec3&)> value;
  std::function<double(double, const Vec3&)> dt;    // d a / d t
  std::function<Vec3(double, const Vec3&)> grad;    // spatial gradient
};

// Time-periodic obstacle as a signed distance (negative inside O(t)).
struct ObstacleMotion {
  double period = 1.0;
  double bound_radius = 0.5;  // rho1, O(t) stays inside |x| <= rho1
  double speed_ratio = 0.9;   // kappa in [0,1): |nu_t| < kappa |nu_x| on the boundary
  bool moving = false;
  std::function<double(double, const Vec3&)> distance;
  // One interior point per connected component, used to seed boundary sampling.
  std::function<std::vector<Vec3>(double)> seeds;
};

struct Scenario {
  MetricField metric;
  std::optional<ObstacleMotion> obstacle;
  std::string label;
  std::string notes;

  int dim() const { return metric.dim; }
  double period() const { return metric.period; }
};

// Family of scenarios for the splice construction: a transient, compactly
// supported metric deformation active on t mod T in [0, splice_time), static
// pair (a1, O) on [splice_time, T].
struct GluedFamily {
  MetricField static_metric;                 // a1(x), time-independent
  std::optional<ObstacleMotion> obstacle;    // static O
  double splice_time = 1.0;                  // T1
  double total_period = 4.0;                 // T >= T1
  double transient_amplitude = 0.0;
  double transient_radius = 1.0;             // spatial support of the hump
};

struct CheckResult {
  std::string name;
  bool passed = true;
  double margin = 0.0;   // worst-case slack; negative when violated
  double t = 0.0;        // worst sample point
  Vec3 x{0, 0, 0};
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

struct SamplingSpec {
  int time_samples = 16;
  int space_samples = 17;   // per axis over the validation box
  int boundary_directions = 64;
  double tolerance = 1e-12; // periodicity / flatness slack
};

struct SpaceTimeNormal {
  double nu_t = 0.0;
  Vec3 nu_x{0, 0, 0};
};

// Samples every scenario invariant (bounds, flatness, periodicity, obstacle
// confinement/periodicity, boundary normal speed) and reports margins.
// Throws ParameterError on malformed scenarios (non-finite samples).
ValidationReport validate_scenario(const Scenario& s, const SamplingSpec& spec = {});

// Builds the periodic scenario of a GluedFamily. The transient is blended
// with a temporal window vanishing to all orders at t = 0 and t = T1; the
// evaluator returns the static metric bit-identically on [T1, T].
Scenario glued_scenario(const GluedFamily& f);

// Unit space-time normal proportional to (d_t d, grad_x d) at a boundary
// point, oriented into the exterior domain. Throws ParameterError when x is
// not within tol of the boundary or the spatial gradient degenerates.
SpaceTimeNormal boundary_normal(const ObstacleMotion& o, double t, const Vec3& x,
                                double tol = 1e-6);

// Numeric gradient helpers shared by validation and the ray tracer when a
// closed form is not supplied.
double obstacle_dt(const ObstacleMotion& o, double t, const Vec3& x);
Vec3 obstacle_grad(const ObstacleMotion& o, double t, const Vec3& x);

}  // namespace wavelab
