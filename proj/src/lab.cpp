#include "wavelab/lab.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace wavelab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string iso_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&tt));
  return buf;
}

class ManifestBuilder {
 public:
  ManifestBuilder(const ExperimentConfig& cfg, const std::string& command) : cfg_(cfg) {
    j_["command"] = command;
    j_["artifact_version"] = kVersion;
    j_["config_hash"] = hex64(cfg.doc.hash());
    j_["seed"] = cfg.seed;
    j_["created"] = iso_now();
    j_["files"] = json::array();
  }
  void add_file(const std::string& name, std::uint64_t checksum) {
    j_["files"].push_back({{"name", name}, {"checksum", hex64(checksum)}});
  }
  json& summary() { return j_["summary"]; }
  void write(const std::string& dir) {
    write_file_atomic(dir + "/manifest.json", j_.dump(2) + "\n");
  }

 private:
  const ExperimentConfig& cfg_;
  json j_;
};

std::uint64_t emit(ManifestBuilder& mb, const std::string& dir, const std::string& name,
                   const std::string& content) {
  std::uint64_t sum = write_file_atomic(dir + "/" + name, content);
  mb.add_file(name, sum);
  return sum;
}

GridWeight default_chi(const Stepper& st) {
  const double rho = st.scenario().metric.flat_radius;
  return radial_cutoff(st.grid(), rho, rho + 1.0);
}

std::string csv_row(std::initializer_list<double> vals) {
  std::string row;
  bool first = true;
  for (double v : vals) {
    if (!first) row += ",";
    row += fmt_g17(v);
    first = false;
  }
  return row;
}

ArnoldiOptions arnoldi_from_config(const ExperimentConfig& cfg) {
  ArnoldiOptions a;
  a.count = cfg.doc.get_int("floquet", "count", 8);
  a.max_dim = cfg.doc.get_int("floquet", "krylov", 60);
  a.tol = cfg.doc.get_double("floquet", "tol", 1e-9);
  a.restarts = cfg.doc.get_int("floquet", "restarts", 8);
  a.seed = cfg.seed;
  return a;
}

}  // namespace

ExperimentConfig make_experiment_config(const std::string& scenario_name,
                                        const std::string& config_path,
                                        const std::string& out_dir, std::uint64_t seed,
                                        int threads) {
  ExperimentConfig cfg;
  if (!scenario_name.empty())
    cfg.doc = parse_ini_text(builtin_config_text(scenario_name), "builtin:" + scenario_name);
  if (!config_path.empty()) cfg.doc = merge_ini(cfg.doc, parse_ini_file(config_path));
  if (cfg.doc.sections().empty())
    throw ParameterError("no scenario given: pass --scenario NAME or --config PATH");
  cfg.out_dir = out_dir;
  cfg.seed = seed;
  cfg.threads = threads;
  if (threads > 0) set_thread_count(threads);
  return cfg;
}

LabSetup make_setup(const ExperimentConfig& cfg) {
  LabSetup s;
  s.scenario = scenario_from_ini(cfg.doc);
  const int cells = cfg.doc.get_int("plan", "cells", 32);
  const double half_width = cfg.doc.get_double("plan", "half_width", 4.0);
  s.grid = std::make_shared<Grid>(make_grid(s.scenario.dim(), half_width, cells));
  const double cfl = cfg.doc.get_double("plan", "cfl", 0.9);
  const std::string bmode = cfg.doc.get_string("plan", "boundary", "reflecting");
  BoundaryMode boundary;
  if (bmode == "reflecting") {
    boundary = BoundaryMode::reflecting;
  } else if (bmode == "sponge") {
    boundary = BoundaryMode::sponge;
  } else {
    throw ParameterError("[plan].boundary must be 'reflecting' or 'sponge'");
  }
  int steps = cfg.doc.get_int("plan", "steps_per_period", 0);
  if (steps == 0 && cfg.doc.has("plan", "steps_per_splice")) {
    double t1 = cfg.doc.require_double("glue", "t1");
    double T = s.scenario.period();
    steps = cfg.doc.get_int("plan", "steps_per_splice", 5) *
            static_cast<int>(std::llround(T / t1));
  }
  s.plan = make_plan(*s.grid, s.scenario, cfl, boundary, steps);
  s.plan.sponge_width = cfg.doc.get_int("plan", "sponge_width", 12);
  s.plan.sponge_strength = cfg.doc.get_double("plan", "sponge_strength", 2.0);
  s.stepper = std::make_shared<const Stepper>(s.grid, s.plan, s.scenario);
  return s;
}

std::uint64_t write_file_atomic(const std::string& path, const std::string& content) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ParameterError("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw NumericalError("short write: " + path);
  }
  fs::rename(tmp, p);
  return fnv1a(content.data(), content.size());
}

int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ParameterError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const CheckFailure& e) {
    std::fprintf(stderr, "check failed: %s\n", e.what());
    return 1;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

int cmd_validate(const ExperimentConfig& cfg) {
  Scenario s = scenario_from_ini(cfg.doc);
  SamplingSpec spec;
  spec.time_samples = cfg.doc.get_int("validate", "time_samples", 16);
  spec.space_samples = cfg.doc.get_int("validate", "space_samples", 17);
  spec.boundary_directions = cfg.doc.get_int("validate", "boundary_directions", 64);
  ValidationReport rep = validate_scenario(s, spec);

  json j;
  j["scenario"] = s.label;
  j["all_passed"] = rep.all_passed();
  j["checks"] = json::array();
  for (const auto& c : rep.checks) {
    j["checks"].push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"margin", c.margin},
                           {"t", c.t},
                           {"x", {c.x[0], c.x[1], c.x[2]}},
                           {"detail", c.detail}});
  }
  ManifestBuilder mb(cfg, "validate");
  emit(mb, cfg.out_dir, "validation.json", j.dump(2) + "\n");
  mb.summary() = {{"scenario", s.label}, {"all_passed", rep.all_passed()}};
  mb.write(cfg.out_dir);
  for (const auto& c : rep.checks) {
    std::printf("%-28s %s  margin=%.6g\n", c.name.c_str(), c.passed ? "PASS" : "FAIL", c.margin);
  }
  return rep.all_passed() ? 0 : 1;
}

int cmd_evolve(const ExperimentConfig& cfg) {
  LabSetup s = make_setup(cfg);
  const Stepper& st = *s.stepper;

  const double width = cfg.doc.get_double("evolve", "width", 0.5);
  const double amp = cfg.doc.get_double("evolve", "amplitude", 1.0);
  Vec3 c{cfg.doc.get_double("evolve", "cx", 0.0), cfg.doc.get_double("evolve", "cy", 0.0),
         cfg.doc.get_double("evolve", "cz", 0.0)};
  WaveState w = st.make_state(
      [&](const Vec3& x) { return amp * bump(norm(sub(x, c)) / width); }, nullptr, 0);

  const double horizon = cfg.doc.get_double("evolve", "horizon", 4.0);
  const int stride = cfg.doc.get_int("evolve", "sample_stride", 0);
  const int sample_every = stride > 0 ? stride : st.plan().steps_per_period;
  const std::string variant_name = cfg.doc.get_string("evolve", "variant", "metric_discrete");
  EnergyVariant variant = EnergyVariant::metric_discrete;
  if (variant_name == "paper") variant = EnergyVariant::paper;
  else if (variant_name == "metric") variant = EnergyVariant::metric;
  else if (variant_name != "metric_discrete")
    throw ParameterError("[evolve].variant must be paper|metric|metric_discrete");

  GridWeight chi = default_chi(st);
  std::ostringstream csv;
  csv << "t,E_total,E_local,norm_variant\n";
  std::int64_t target = st.lattice_index(st.dt() * std::llround(horizon / st.dt()));
  WaveState cur = w;
  for (std::int64_t k = 0; k <= target; ++k) {
    if (k % sample_every == 0) {
      double etot = st.energy(cur, nullptr, variant).value;
      double eloc = st.energy(cur, &chi, EnergyVariant::paper).value;
      csv << csv_row({cur.time, etot, eloc}) << "," << variant_name << "\n";
    }
    if (k < target) st.step_inplace(cur);
  }

  ManifestBuilder mb(cfg, "evolve");
  emit(mb, cfg.out_dir, "energy.csv", csv.str());
  std::string snap = cfg.out_dir + "/final.fwlb";
  fs::create_directories(cfg.out_dir);
  save_snapshot(snap, cur, st.dt());
  {
    std::ifstream in(snap, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string bytes = ss.str();
    mb.add_file("final.fwlb", fnv1a(bytes.data(), bytes.size()));
  }
  mb.summary() = {{"scenario", s.scenario.label},
                  {"final_time", cur.time},
                  {"energy_variant", variant_name}};
  mb.write(cfg.out_dir);
  return 0;
}

int cmd_decay(const ExperimentConfig& cfg) {
  LabSetup s = make_setup(cfg);
  const Stepper& st = *s.stepper;
  DecayOptions opt;
  opt.horizon = cfg.doc.get_double("decay", "horizon", 16.0);
  opt.ensemble = cfg.doc.get_int("decay", "ensemble", 32);
  opt.sample_stride = cfg.doc.get_int("decay", "sample_stride", 0);
  opt.seed = cfg.seed;
  GridWeight chi = default_chi(st);
  DecayProfile prof = decay_profile(st, chi, opt);

  std::ostringstream csv;
  csv << "t,E_mean,E_max,ensemble,norm_variant\n";
  for (std::size_t i = 0; i < prof.times.size(); ++i) {
    csv << csv_row({prof.times[i], prof.e_mean[i], prof.e_max[i]}) << ","
        << prof.ensemble << ",paper\n";
  }

  RateFit ef = fit_rate(prof, RateModel::exp);
  RateFit gf = fit_rate(prof, RateModel::growth);
  const char* selected = "exp";
  if (gf.rate > 0.0 && (ef.rate == 0.0 || gf.residual < ef.residual)) selected = "growth";

  json jf;
  jf["scenario"] = prof.scenario_label;
  jf["exp"] = {{"delta", ef.rate},  {"C", ef.amplitude},        {"residual", ef.residual},
               {"points", ef.points}, {"window", {ef.window_start, ef.window_end}}};
  jf["growth"] = {{"gamma", gf.rate}, {"C", gf.amplitude}, {"residual", gf.residual}};
  jf["selected"] = selected;

  ManifestBuilder mb(cfg, "decay");
  emit(mb, cfg.out_dir, "profile.csv", csv.str());
  emit(mb, cfg.out_dir, "fit.json", jf.dump(2) + "\n");
  mb.summary() = {{"scenario", prof.scenario_label},
                  {"delta_fit", ef.rate},
                  {"exp_residual", ef.residual},
                  {"gamma_fit", gf.rate},
                  {"growth_residual", gf.residual},
                  {"selected", selected}};
  mb.write(cfg.out_dir);
  std::printf("decay: scenario=%s selected=%s delta=%.6g gamma=%.6g\n",
              prof.scenario_label.c_str(), selected, ef.rate, gf.rate);
  return 0;
}

int cmd_spectrum(const ExperimentConfig& cfg) {
  LabSetup s = make_setup(cfg);
  FloquetOperator M(s.stepper);
  ArnoldiOptions aopt = arnoldi_from_config(cfg);

  PoleReport poles;
  bool pole_mode = s.plan.boundary == BoundaryMode::sponge;
  SpectrumReport spec;
  if (pole_mode) {
    poles = detect_poles(M, aopt, cfg.doc.get_double("floquet", "strip_min_im", -10.0),
                         cfg.doc.get_double("floquet", "interior_threshold", 1e-3));
  }
  spec = arnoldi_spectrum(M.map(), aopt);

  std::ostringstream csv;
  csv << "re_mu,im_mu,abs_mu,re_theta,im_theta,residual\n";
  for (const auto& e : spec.eigs) {
    Complex th = SpectrumReport::theta_of(e.mu);
    csv << csv_row({e.mu.real(), e.mu.imag(), std::abs(e.mu), th.real(), th.imag(), e.residual})
        << "\n";
  }

  json j;
  j["scenario"] = s.scenario.label;
  j["krylov_dim"] = spec.krylov_dim;
  j["converged"] = spec.converged;
  j["spectral_radius"] = spec.spectral_radius;
  if (pole_mode) {
    j["delta_est"] = poles.delta_est;
    j["any_flagged"] = poles.any_flagged;
    j["interior_threshold"] = poles.interior_threshold;
    j["sponge_strength"] = poles.sponge_strength;
    j["poles"] = json::array();
    for (const auto& r : poles.poles) {
      j["poles"].push_back({{"re_mu", r.mu.real()},
                            {"im_mu", r.mu.imag()},
                            {"re_theta", r.theta.real()},
                            {"im_theta", r.theta.imag()},
                            {"residual", r.residual},
                            {"interior_fraction", r.interior_fraction},
                            {"flagged", r.flagged}});
    }
  }

  ManifestBuilder mb(cfg, "spectrum");
  emit(mb, cfg.out_dir, "spectrum.csv", csv.str());
  emit(mb, cfg.out_dir, "spectrum.json", j.dump(2) + "\n");
  mb.summary() = {{"scenario", s.scenario.label},
                  {"mu_max_abs", spec.spectral_radius},
                  {"converged", spec.converged}};
  if (pole_mode) {
    mb.summary()["delta_est"] = poles.delta_est;
    mb.summary()["any_flagged"] = poles.any_flagged;
  }
  mb.write(cfg.out_dir);
  std::printf("spectrum: scenario=%s |mu_max|=%.9g%s\n", s.scenario.label.c_str(),
              spec.spectral_radius,
              pole_mode ? (poles.any_flagged ? " POLE FLAGGED" : "") : "");
  return 0;
}

int cmd_resolvent(const ExperimentConfig& cfg) {
  LabSetup s = make_setup(cfg);
  FloquetOperator M(s.stepper);
  const Stepper& st = *s.stepper;

  const int trials = cfg.doc.get_int("resolvent", "norm_trials", 4);
  NormEstimate fit = operator_norm_estimate(st, 0, st.plan().steps_per_period, trials, cfg.seed);
  const double im_offset = cfg.doc.get_double("resolvent", "im_offset", 1.0);
  const double im_theta = (fit.A + im_offset) * st.period();
  const int n_re = cfg.doc.get_int("resolvent", "re_samples", 5);
  const int probes = cfg.doc.get_int("resolvent", "probes", 3);
  const int n_max = cfg.doc.get_int("resolvent", "n_max", 200);

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::vector<double>> rhs;
  for (int p = 0; p < probes; ++p) {
    WaveState f = st.random_state(rng, nullptr, 0);
    std::vector<double> vec(M.dim());
    st.to_vector(f, vec.data());
    rhs.push_back(std::move(vec));
  }
  CutoffPair cut = default_cutoffs(st);

  std::ostringstream csv;
  csv << "re_theta,im_theta,norm_series,norm_solve,rel_diff\n";
  double worst = 0.0;
  for (int i = 0; i < n_re; ++i) {
    double re = -M_PI + 2.0 * M_PI * i / std::max(1, n_re - 1);
    Complex theta(re, im_theta);
    ResolventProbe ps = resolvent_series(M, cut, theta, n_max, rhs, fit);
    ResolventProbe px = resolvent_solve(M, cut, theta, rhs);
    double rel = 0.0;
    for (std::size_t q = 0; q < rhs.size(); ++q) {
      double num = 0.0, den = 0.0;
      for (std::size_t r = 0; r < ps.results[q].size(); ++r) {
        num += std::norm(ps.results[q][r] - px.results[q][r]);
        den += std::norm(ps.results[q][r]);
      }
      rel = std::max(rel, std::sqrt(num / std::max(den, 1e-300)));
    }
    worst = std::max(worst, rel);
    csv << csv_row({re, im_theta, ps.norm_estimate, px.norm_estimate, rel}) << "\n";
  }

  ManifestBuilder mb(cfg, "resolvent");
  emit(mb, cfg.out_dir, "resolvent.csv", csv.str());
  mb.summary() = {{"scenario", s.scenario.label},
                  {"A_fit", fit.A},
                  {"B_fit", fit.B},
                  {"im_theta", im_theta},
                  {"max_series_solve_diff", worst}};
  mb.write(cfg.out_dir);
  std::printf("resolvent: Im theta=%.4g max series/solve rel diff=%.3g\n", im_theta, worst);
  return worst <= cfg.doc.get_double("resolvent", "tolerance", 1e-8) ? 0 : 1;
}

int cmd_rays(const ExperimentConfig& cfg) {
  Scenario sc = scenario_from_ini(cfg.doc);
  ScanOptions opt;
  opt.radius = cfg.doc.get_double("rays", "radius", 2.0);
  opt.t_budget = cfg.doc.get_double("rays", "budget", 60.0);
  opt.max_reflections = cfg.doc.get_int("rays", "max_reflections", 64);
  int samples = cfg.doc.get_int("rays", "samples", 96);
  opt.time_samples = cfg.doc.get_int("rays", "time_samples", 2);
  opt.point_samples = std::max(1, samples / (opt.time_samples * 12));
  opt.direction_samples = 12;
  opt.seed = cfg.seed;
  NonTrappingReport rep = nontrapping_scan(sc, opt);

  // Trajectory CSV: the first witness when present, else a fresh sample ray.
  RayTrajectory traj;
  if (!rep.witnesses.empty()) {
    traj = rep.witnesses.front();
  } else {
    TraceOptions topt;
    topt.t_max = opt.t_budget;
    topt.escape_radius = opt.radius;
    topt.max_reflections = opt.max_reflections;
    RayState s0;
    s0.x = {0.25 * opt.radius, 0, 0};
    s0.xi = {1, 0, 0};
    s0.tau = -1.0;
    traj = trace_ray(s0, sc, topt);
  }
  std::ostringstream csv;
  csv << "sigma,t,x1,x2,x3,tau,xi1,xi2,xi3,event_flag\n";
  std::size_t ev = 0;
  for (const auto& st : traj.samples) {
    int flag = 0;
    if (ev < traj.events.size() && std::abs(traj.events[ev].t - st.t) < 1e-12) {
      flag = 1;
      ++ev;
    }
    csv << csv_row({st.sigma, st.t, st.x[0], st.x[1], st.x[2], st.tau, st.xi[0], st.xi[1],
                    st.xi[2]})
        << "," << flag << "\n";
  }

  json j;
  j["scenario"] = sc.label;
  j["T1_estimate"] = rep.t1_estimate;
  j["samples"] = rep.samples;
  j["witnesses"] = rep.witnesses.size();
  j["grazing_discards"] = rep.grazing_discards;
  j["radius"] = rep.radius;

  ManifestBuilder mb(cfg, "rays");
  emit(mb, cfg.out_dir, "trajectory.csv", csv.str());
  emit(mb, cfg.out_dir, "scan_summary.json", j.dump(2) + "\n");
  mb.summary() = {{"scenario", sc.label},
                  {"T1_estimate", rep.t1_estimate},
                  {"witnesses", rep.witnesses.size()},
                  {"grazing_discards", rep.grazing_discards}};
  mb.write(cfg.out_dir);
  std::printf("rays: scenario=%s T1=%.6g witnesses=%zu grazing=%d\n", sc.label.c_str(),
              rep.t1_estimate, rep.witnesses.size(), rep.grazing_discards);
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg) {
  GluedFamily fam = glued_family_from_ini(cfg.doc);
  SweepOptions opt;
  std::string periods = cfg.doc.get_string("sweep", "periods", "1,2,4,8");
  std::istringstream ps(periods);
  std::string tok;
  while (std::getline(ps, tok, ','))
    opt.total_periods.push_back(std::stod(tok) * fam.splice_time);
  opt.cells = cfg.doc.get_int("plan", "cells", 48);
  opt.half_width = cfg.doc.get_double("plan", "half_width", 6.0);
  opt.cfl = cfg.doc.get_double("plan", "cfl", 0.9);
  opt.steps_per_splice = cfg.doc.get_int("plan", "steps_per_splice", 5);
  opt.sponge_width = cfg.doc.get_int("plan", "sponge_width", 12);
  opt.sponge_strength = cfg.doc.get_double("plan", "sponge_strength", 3.0);
  opt.decay.horizon = cfg.doc.get_double("decay", "horizon", 16.0);
  opt.decay.ensemble = cfg.doc.get_int("decay", "ensemble", 16);
  opt.decay.seed = cfg.seed;
  opt.arnoldi = arnoldi_from_config(cfg);
  SweepReport rep = theorem6_sweep(fam, opt);

  std::ostringstream csv;
  csv << "T,delta_est,delta_fit,lemma5_residual\n";
  bool nondecreasing = true;
  for (std::size_t i = 0; i < rep.entries.size(); ++i) {
    const auto& e = rep.entries[i];
    csv << csv_row({e.T, e.delta_est, e.delta_fit, e.lemma5_residual}) << "\n";
    if (i > 0 && e.delta_est < rep.entries[i - 1].delta_est - 1e-12) nondecreasing = false;
  }

  ManifestBuilder mb(cfg, "sweep");
  emit(mb, cfg.out_dir, "sweep.csv", csv.str());
  mb.summary() = {{"t_star", rep.t_star},
                  {"nondecreasing", nondecreasing},
                  {"psi_plateau", rep.psi_plateau},
                  {"psi_support", rep.psi_support}};
  mb.write(cfg.out_dir);
  std::printf("sweep: T* = %.6g nondecreasing=%d\n", rep.t_star, nondecreasing);
  return 0;
}

int cmd_report(const std::vector<std::string>& manifest_paths, const std::string& out_dir) {
  struct Row {
    std::string scenario;
    std::string hash;
    double delta_fit = -1.0, gamma_fit = -1.0, exp_residual = -1.0;
    double delta_est = 0.0;
    bool have_decay = false, have_spectrum = false, any_flagged = false;
  };
  std::map<std::string, Row> rows;

  for (const auto& mpath : manifest_paths) {
    std::ifstream in(mpath);
    if (!in) throw ParameterError("cannot open manifest: " + mpath);
    json j = json::parse(in, nullptr, true, true);
    // Integrity: every listed file must match its checksum.
    fs::path dir = fs::path(mpath).parent_path();
    for (const auto& f : j["files"]) {
      std::ifstream fin(dir / f["name"].get<std::string>(), std::ios::binary);
      if (!fin) throw ParameterError("manifest lists missing file: " + f["name"].get<std::string>());
      std::ostringstream ss;
      ss << fin.rdbuf();
      std::string bytes = ss.str();
      if (hex64(fnv1a(bytes.data(), bytes.size())) != f["checksum"].get<std::string>())
        throw ParameterError("checksum mismatch for " + f["name"].get<std::string>() + " in " +
                             mpath);
    }
    if (!j.contains("summary")) continue;
    json s = j["summary"];
    std::string scen = s.value("scenario", std::string("unknown"));
    std::string key = scen + "#" + j.value("config_hash", std::string(""));
    Row& r = rows[key];
    r.scenario = scen;
    r.hash = j.value("config_hash", std::string(""));
    std::string cmdname = j.value("command", std::string(""));
    if (cmdname == "decay") {
      r.have_decay = true;
      r.delta_fit = s.value("delta_fit", 0.0);
      r.gamma_fit = s.value("gamma_fit", 0.0);
      r.exp_residual = s.value("exp_residual", 0.0);
    } else if (cmdname == "spectrum") {
      r.have_spectrum = true;
      r.delta_est = s.value("delta_est", 0.0);
      r.any_flagged = s.value("any_flagged", false);
    }
  }

  std::ostringstream csv, txt;
  csv << "scenario,config_hash,delta_fit,gamma_fit,delta_est,flagged_pole,verdict\n";
  txt << "scenario                      verdict       delta_fit    delta_est    flagged\n";
  for (auto& [key, r] : rows) {
    std::string verdict = "incomplete";
    if (r.have_decay && r.have_spectrum) {
      bool decaying = r.delta_fit > 0.0 && !r.any_flagged;
      bool growing = r.any_flagged && r.gamma_fit > 0.0;
      if (decaying && !growing) verdict = "decay";
      else if (growing && !decaying) verdict = "growth";
      else verdict = "INCONSISTENT";
    } else if (r.have_decay) {
      verdict = r.gamma_fit > 0.0 && r.delta_fit == 0.0 ? "growth?" : "decay?";
    }
    csv << r.scenario << "," << r.hash << "," << fmt_g17(r.delta_fit) << ","
        << fmt_g17(r.gamma_fit) << "," << fmt_g17(r.delta_est) << ","
        << (r.any_flagged ? 1 : 0) << "," << verdict << "\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%-28s  %-12s  %11.5g  %11.5g  %d\n", r.scenario.c_str(),
                  verdict.c_str(), r.delta_fit, r.delta_est, r.any_flagged ? 1 : 0);
    txt << line;
  }
  write_file_atomic(out_dir + "/summary.csv", csv.str());
  write_file_atomic(out_dir + "/summary.txt", txt.str());
  std::fputs(txt.str().c_str(), stdout);
  return 0;
}

}  // namespace wavelab
