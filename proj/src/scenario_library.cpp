#include "wavelab/scenario_library.hpp"

#include <algorithm>
#include <cmath>

namespace wavelab {

namespace {

MetricField identity_metric(int dim, double period, double rho) {
  MetricField m;
  m.dim = dim;
  m.period = period;
  m.flat_radius = rho;
  m.lower_bound = 1.0;
  m.upper_bound = 1.0;
  m.time_dependent = false;
  m.identically_one = true;
  m.static_from = 0.0;
  m.value = [](double, const Vec3&) { return 1.0; };
  m.dt = [](double, const Vec3&) { return 0.0; };
  m.grad = [](double, const Vec3&) { return Vec3{0, 0, 0}; };
  return m;
}

// a(t,x) = 1 + (bias + mod*sin(2 pi t / T)) * bump(|x|/width)
MetricField pump_well_metric(int dim, double period, double width, double bias, double mod) {
  MetricField m;
  m.dim = dim;
  m.period = period;
  m.flat_radius = width;
  // Tiny slack: the sampled extremum and this closed form round differently.
  m.lower_bound = std::min(1.0, 1.0 + bias - std::abs(mod)) - 1e-12;
  m.upper_bound = std::max(1.0, 1.0 + bias + std::abs(mod)) + 1e-12;
  m.time_dependent = mod != 0.0;
  m.identically_one = bias == 0.0 && mod == 0.0;
  m.static_from = mod != 0.0 ? period : 0.0;
  const double om = 2.0 * M_PI / period;
  m.value = [bias, mod, om, width](double t, const Vec3& x) {
    return 1.0 + (bias + mod * std::sin(om * t)) * bump(norm(x) / width);
  };
  m.dt = [mod, om, width](double t, const Vec3& x) {
    return mod * om * std::cos(om * t) * bump(norm(x) / width);
  };
  m.grad = [bias, mod, om, width](double t, const Vec3& x) {
    double r = norm(x);
    if (r < 1e-14) return Vec3{0, 0, 0};
    double c = (bias + mod * std::sin(om * t)) * bump_ds(r / width) / (width * r);
    return scale(x, c);
  };
  if (m.lower_bound <= 0.0)
    throw ParameterError("metric lower bound must stay positive (bias/modulation too deep)");
  return m;
}

double ball_sdf(const Vec3& x, const Vec3& c, double r) { return norm(sub(x, c)) - r; }

ObstacleMotion ball_obstacle(double period, const Vec3& center, double radius, double kappa) {
  ObstacleMotion o;
  o.period = period;
  o.bound_radius = norm(center) + radius + 0.1;
  o.speed_ratio = kappa;
  o.moving = false;
  o.distance = [center, radius](double, const Vec3& x) { return ball_sdf(x, center, radius); };
  o.seeds = [center](double) { return std::vector<Vec3>{center}; };
  return o;
}

ObstacleMotion moving_ball_obstacle(double period, double swing, double radius, double kappa) {
  ObstacleMotion o;
  o.period = period;
  o.bound_radius = swing + radius + 0.1;
  o.speed_ratio = kappa;
  o.moving = true;
  const double om = 2.0 * M_PI / period;
  auto center = [swing, om](double t) { return Vec3{swing * std::sin(om * t), 0, 0}; };
  o.distance = [center, radius](double t, const Vec3& x) { return ball_sdf(x, center(t), radius); };
  o.seeds = [center](double t) { return std::vector<Vec3>{center(t)}; };
  return o;
}

ObstacleMotion pulsating_ball_obstacle(double period, double r0, double r1, double kappa) {
  ObstacleMotion o;
  o.period = period;
  o.bound_radius = r0 + std::abs(r1) + 0.1;
  o.speed_ratio = kappa;
  o.moving = true;
  const double om = 2.0 * M_PI / period;
  o.distance = [r0, r1, om](double t, const Vec3& x) {
    return norm(x) - (r0 + r1 * std::sin(om * t));
  };
  o.seeds = [](double) { return std::vector<Vec3>{Vec3{0, 0, 0}}; };
  return o;
}

ObstacleMotion two_ball_obstacle(double period, double sep, double radius, double kappa) {
  ObstacleMotion o;
  o.period = period;
  o.bound_radius = sep + radius + 0.1;
  o.speed_ratio = kappa;
  o.moving = false;
  const Vec3 c1{sep, 0, 0}, c2{-sep, 0, 0};
  o.distance = [c1, c2, radius](double, const Vec3& x) {
    return std::min(ball_sdf(x, c1, radius), ball_sdf(x, c2, radius));
  };
  o.seeds = [c1, c2](double) { return std::vector<Vec3>{c1, c2}; };
  return o;
}

}  // namespace

MetricField metric_from_ini(const IniDoc& doc) {
  std::string kind = doc.get_string("metric", "kind", "identity");
  int dim = doc.get_int("metric", "dim", 3);
  if (dim < 1 || dim > 3) throw ParameterError("[metric].dim must be 1, 2 or 3");
  double period = doc.get_double("metric", "period", 1.0);
  if (period <= 0.0) throw ParameterError("[metric].period must be positive");
  double rho = doc.get_double("metric", "rho", 1.0);

  if (kind == "identity") return identity_metric(dim, period, rho);
  if (kind == "radial-bump") {
    double amp = doc.get_double("metric", "amplitude", 0.5);
    double width = doc.get_double("metric", "width", rho);
    return pump_well_metric(dim, period, width, amp, 0.0);
  }
  if (kind == "sin-bump") {
    double amp = doc.get_double("metric", "amplitude", 0.5);
    double width = doc.get_double("metric", "width", rho);
    return pump_well_metric(dim, period, width, 0.0, amp);
  }
  if (kind == "pump-well") {
    double bias = doc.get_double("metric", "bias", -0.75);
    double mod = doc.get_double("metric", "modulation", 0.1);
    double width = doc.get_double("metric", "width", rho);
    return pump_well_metric(dim, period, width, bias, mod);
  }
  throw ParameterError("unknown [metric].kind: " + kind);
}

Scenario scenario_from_ini(const IniDoc& doc) {
  Scenario s;
  if (doc.has_section("glue")) {
    GluedFamily fam = glued_family_from_ini(doc);
    s = glued_scenario(fam);
  } else {
    s.metric = metric_from_ini(doc);
  }
  std::string okind = doc.get_string("obstacle", "kind", "none");
  double period = s.metric.period;
  if (okind != "none") {
    double kappa = doc.get_double("obstacle", "speed_ratio", 0.9);
    if (kappa < 0.0 || kappa >= 1.0)
      throw ParameterError("[obstacle].speed_ratio must lie in [0,1)");
    ObstacleMotion o;
    if (okind == "ball") {
      Vec3 c{doc.get_double("obstacle", "cx", 0.0), doc.get_double("obstacle", "cy", 0.0),
             doc.get_double("obstacle", "cz", 0.0)};
      o = ball_obstacle(period, c, doc.get_double("obstacle", "radius", 0.25), kappa);
    } else if (okind == "moving-ball") {
      o = moving_ball_obstacle(period, doc.get_double("obstacle", "swing", 0.15),
                               doc.get_double("obstacle", "radius", 0.25), kappa);
    } else if (okind == "pulsating-ball") {
      o = pulsating_ball_obstacle(period, doc.get_double("obstacle", "radius", 0.25),
                                  doc.get_double("obstacle", "pulse", 0.05), kappa);
    } else if (okind == "two-ball") {
      o = two_ball_obstacle(period, doc.get_double("obstacle", "separation", 0.7),
                            doc.get_double("obstacle", "radius", 0.35), kappa);
    } else {
      throw ParameterError("unknown [obstacle].kind: " + okind);
    }
    if (doc.has("obstacle", "rho1")) o.bound_radius = doc.get_double("obstacle", "rho1", 0.0);
    if (o.bound_radius >= s.metric.flat_radius)
      throw ParameterError("obstacle bound radius rho1 must stay below metric rho");
    s.obstacle = o;
  }
  s.label = doc.get_string("scenario", "label", s.label.empty() ? "custom" : s.label);
  return s;
}

GluedFamily glued_family_from_ini(const IniDoc& doc) {
  GluedFamily f;
  f.static_metric = metric_from_ini(doc);  // [metric] describes the static a1
  if (f.static_metric.time_dependent)
    throw ParameterError("[glue] requires a static base metric");
  f.splice_time = doc.require_double("glue", "t1");
  f.total_period = doc.get_double("glue", "total_period", 4.0 * f.splice_time);
  f.transient_amplitude = doc.get_double("glue", "amplitude", 0.3);
  f.transient_radius = doc.get_double("glue", "radius", 1.0);
  if (doc.get_string("obstacle", "kind", "none") != "none") {
    IniDoc no_glue;
    for (const auto& [sec, kv] : doc.sections())
      if (sec != "glue")
        for (const auto& [k, v] : kv) no_glue.set(sec, k, v);
    f.obstacle = scenario_from_ini(no_glue).obstacle;
  }
  return f;
}

std::vector<std::string> builtin_names() {
  return {"free",      "free3d-radial", "static-nontrap", "glued-T1", "glued-T2",
          "glued-T4",  "glued-T8",      "pump-cavity",    "two-ball-trap",
          "moving-ball", "tiny1d"};
}

std::string builtin_config_text(const std::string& name) {
  if (name == "free")
    return R"(
[scenario]
label = free
[metric]
kind = identity
dim = 3
period = 1.0
rho = 1.0
[plan]
half_width = 4.0
cells = 32
cfl = 0.9
boundary = reflecting
[decay]
horizon = 2.0
ensemble = 8
[floquet]
krylov = 40
count = 6
)";
  if (name == "free3d-radial")
    return R"(
[scenario]
label = free3d-radial
[metric]
kind = identity
dim = 3
period = 1.0
rho = 1.0
[radial]
cells = 2400
extent = 24.0
cfl = 0.9
support_radius = 2.0
[plan]
half_width = 4.0
cells = 32
cfl = 0.9
boundary = reflecting
)";
  if (name == "static-nontrap")
    return R"(
[scenario]
label = static-nontrap
[metric]
kind = radial-bump
dim = 3
period = 1.0
amplitude = 0.5
width = 1.0
rho = 1.0
[plan]
half_width = 6.0
cells = 48
cfl = 0.9
boundary = sponge
sponge_width = 12
sponge_strength = 3.0
steps_per_period = 10
[decay]
horizon = 24.0
ensemble = 32
[floquet]
krylov = 60
count = 10
)";
  if (name.rfind("glued-T", 0) == 0) {
    std::string mult = name.substr(7);
    if (mult != "1" && mult != "2" && mult != "4" && mult != "8")
      throw ParameterError("unknown builtin scenario: " + name);
    double k = std::stod(mult);
    std::string text = R"(
[scenario]
label = )" + name + R"(
[metric]
kind = radial-bump
dim = 3
period = 1.0
amplitude = 0.5
width = 1.0
rho = 1.0
[glue]
t1 = 0.5
total_period = )" + fmt_g17(0.5 * k) + R"(
amplitude = 0.35
radius = 1.0
[plan]
half_width = 6.0
cells = 48
cfl = 0.9
boundary = sponge
sponge_width = 12
sponge_strength = 3.0
steps_per_splice = 5
[decay]
horizon = 24.0
ensemble = 32
[floquet]
krylov = 60
count = 10
[sweep]
periods = 1,2,4,8
)";
    return text;
  }
  if (name == "pump-cavity")
    return R"(
[scenario]
label = pump-cavity
[metric]
kind = pump-well
dim = 1
period = 14.5
bias = -0.96
modulation = 0.02
width = 1.0
rho = 1.0
[plan]
half_width = 8.0
cells = 512
cfl = 0.9
boundary = sponge
sponge_width = 48
sponge_strength = 2.0
[decay]
horizon = 120.0
ensemble = 8
[floquet]
krylov = 80
count = 8
)";
  if (name == "two-ball-trap")
    return R"(
[scenario]
label = two-ball-trap
[metric]
kind = identity
dim = 3
period = 1.0
rho = 1.2
[obstacle]
kind = two-ball
separation = 0.7
radius = 0.35
speed_ratio = 0.5
rho1 = 1.1
[rays]
radius = 2.0
budget = 60.0
samples = 96
max_reflections = 64
[plan]
half_width = 4.0
cells = 32
cfl = 0.9
boundary = sponge
sponge_width = 8
sponge_strength = 2.0
)";
  if (name == "moving-ball")
    return R"(
[scenario]
label = moving-ball
[metric]
kind = identity
dim = 3
period = 2.0
rho = 1.0
[obstacle]
kind = moving-ball
swing = 0.15
radius = 0.3
speed_ratio = 0.7
rho1 = 0.6
[rays]
radius = 2.0
budget = 60.0
samples = 96
max_reflections = 64
[plan]
half_width = 4.0
cells = 40
cfl = 0.9
boundary = sponge
sponge_width = 10
sponge_strength = 2.0
[decay]
horizon = 16.0
ensemble = 16
)";
  if (name == "tiny1d")
    return R"(
[scenario]
label = tiny1d
[metric]
kind = radial-bump
dim = 1
period = 1.0
amplitude = -0.75
width = 0.8
rho = 1.0
[plan]
half_width = 4.0
cells = 128
cfl = 0.9
boundary = sponge
sponge_width = 24
sponge_strength = 2.0
steps_per_period = 18
[floquet]
krylov = 120
count = 8
)";
  throw ParameterError("unknown builtin scenario: " + name);
}

Scenario builtin_scenario(const std::string& name) {
  return scenario_from_ini(parse_ini_text(builtin_config_text(name), "builtin:" + name));
}

}  // namespace wavelab
