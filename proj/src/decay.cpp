#include "wavelab/decay.hpp"

#include <algorithm>
#include <cmath>

namespace wavelab {

DecayProfile decay_profile(const Stepper& st, const GridWeight& chi, const DecayOptions& opt,
                           const std::vector<WaveState>* extra_members) {
  const StepPlan& plan = st.plan();
  const Scenario& sc = st.scenario();
  if (plan.boundary == BoundaryMode::reflecting) {
    double safe = (st.grid().half_width - sc.metric.flat_radius - 1.0) /
                  std::sqrt(sc.metric.upper_bound);
    if (opt.horizon >= safe)
      throw ParameterError("decay_profile: reflecting-mode horizon " +
                           std::to_string(opt.horizon) +
                           " admits outer-boundary returns; safe horizon is " +
                           std::to_string(safe) + " (use the sponge mode beyond that)");
  }
  const int stride = opt.sample_stride > 0 ? opt.sample_stride : plan.steps_per_period;
  const std::int64_t final_index = st.lattice_index(
      plan.dt * std::llround(opt.horizon / plan.dt));

  DecayProfile prof;
  prof.scenario_label = sc.label;
  prof.ensemble = 0;
  prof.period = sc.period();
  for (std::int64_t k = 0; k <= final_index; k += stride) prof.times.push_back(k * plan.dt);
  prof.e_mean.assign(prof.times.size(), 0.0);
  prof.e_max.assign(prof.times.size(), 0.0);

  std::mt19937_64 rng(opt.seed);
  std::vector<WaveState> members;
  for (int m = 0; m < opt.ensemble; ++m) members.push_back(st.random_state(rng, &chi, 0));
  if (extra_members)
    for (const auto& s : extra_members[0]) members.push_back(s);
  prof.ensemble = static_cast<int>(members.size());

  for (auto& f : members) {
    std::size_t mark = 0;
    WaveState cur = f;
    for (std::int64_t k = 0; k <= final_index; ++k) {
      if (mark < prof.times.size() && k % stride == 0) {
        WaveState cut = cur;
        st.apply_weight(cut, chi);
        double e = st.energy(cut, nullptr, EnergyVariant::paper).value;
        prof.e_mean[mark] += e / members.size();
        prof.e_max[mark] = std::max(prof.e_max[mark], e);
        ++mark;
      }
      if (k < final_index) st.step_inplace(cur);
    }
  }
  return prof;
}

RateFit fit_rate(const DecayProfile& p, RateModel model, double window_start, bool use_max) {
  if (p.times.empty()) throw ParameterError("fit_rate: empty profile");
  const std::vector<double>& e = use_max ? p.e_max : p.e_mean;
  const double t0 = window_start >= 0.0 ? window_start : 2.0 * p.period;
  const double floor = 1e-24 * std::max(e.front(), 1e-300);

  RateFit fit;
  fit.model = model;
  std::vector<double> ts, ys;  // log E over the fit window
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    if (p.times[i] < t0) continue;
    if (e[i] <= floor) break;  // numerical floor: restrict to the pre-floor window
    ts.push_back(p.times[i]);
    ys.push_back(std::log(e[i]));
  }
  if (ts.size() < 3) throw ParameterError("fit_rate: fewer than 3 usable samples past the window start");
  fit.points = static_cast<int>(ts.size());
  fit.window_start = ts.front();
  fit.window_end = ts.back();

  if (model == RateModel::even) {
    // Boundedness of E(t) * ((t+1) ln^2(t+e))^2.
    double mean_log = 0.0;
    std::vector<double> s(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      double t = ts[i];
      double w = (t + 1.0) * std::pow(std::log(t + M_E), 2.0);
      s[i] = ys[i] + 2.0 * std::log(w);
      mean_log += s[i] / ts.size();
    }
    fit.amplitude = std::exp(mean_log);
    double rms = 0.0, mx = -1e300;
    for (double v : s) {
      rms += (v - mean_log) * (v - mean_log);
      mx = std::max(mx, v);
    }
    fit.residual = std::sqrt(rms / s.size());
    fit.bounded_stat = std::exp(mx - mean_log);
    fit.rate = 0.0;
    return fit;
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sx += ts[i];
    sy += ys[i];
    sxx += ts[i] * ts[i];
    sxy += ts[i] * ys[i];
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double icept = (sy - slope * sx) / n;
  double rms = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double r = ys[i] - (icept + slope * ts[i]);
    rms += r * r;
  }
  fit.residual = std::sqrt(rms / ts.size());
  fit.amplitude = std::exp(icept);
  // E ~ C e^{-2 delta t} (squared norms), so the norm rate is half the slope.
  fit.rate = model == RateModel::exp ? std::max(0.0, -0.5 * slope) : std::max(0.0, 0.5 * slope);
  return fit;
}

SeriesDecayReport series_decay_check(const FloquetOperator& M, const CutoffPair& cut,
                                     int n_periods, int probes, double eps_im,
                                     std::uint64_t seed) {
  const Stepper& st = M.stepper();
  SeriesDecayReport rep;
  std::mt19937_64 rng(seed);
  const std::size_t n = M.dim();
  const std::vector<Complex> thetas = {Complex(0.0, eps_im), Complex(M_PI / 2, eps_im),
                                       Complex(M_PI, eps_im)};

  std::vector<double> est(n_periods + 1, 0.0);
  double sup_partial = 0.0;
  std::vector<double> partial_history;

  for (int p = 0; p < probes; ++p) {
    WaveState f = st.random_state(rng, nullptr, 0);
    WaveState g = f;
    st.apply_weight(g, cut.psi2);
    double g0 = st.paper_norm(g);
    if (g0 <= 0.0) continue;
    std::vector<CVec> sums(thetas.size(), CVec(n, Complex(0, 0)));
    std::vector<Complex> coefs(thetas.size(), Complex(1, 0));
    WaveState cur = g;
    for (int N = 0; N <= n_periods; ++N) {
      WaveState cutst = cur;
      st.apply_weight(cutst, cut.psi1);
      est[N] = std::max(est[N], st.paper_norm(cutst) / g0);
      std::vector<double> vec(n);
      st.to_vector(cutst, vec.data());
      double worst = 0.0;
      for (std::size_t q = 0; q < thetas.size(); ++q) {
        auto& s = sums[q];
        for (std::size_t i = 0; i < n; ++i) s[i] += coefs[q] * vec[i];
        double nrm = 0.0;
        for (const auto& c : s) nrm += std::norm(c);
        worst = std::max(worst, std::sqrt(nrm));
        coefs[q] *= std::exp(Complex(0, 1) * thetas[q]);
      }
      partial_history.push_back(worst);
      sup_partial = std::max(sup_partial, worst);
      if (N < n_periods) cur = st.evolve(cur, cur.step_index + st.plan().steps_per_period);
    }
  }

  rep.partial_sum_sup = sup_partial;
  if (!partial_history.empty()) {
    double early = 0.0, late = 0.0;
    std::size_t cutpt = partial_history.size() * 3 / 4;
    for (std::size_t i = 0; i < partial_history.size(); ++i)
      (i < cutpt ? early : late) = std::max(i < cutpt ? early : late, partial_history[i]);
    rep.partial_sums_bounded = late <= early * 1.05 + 1e-12;
  }

  double env_early = 0.0, env_late = 0.0;
  for (int N = 0; N <= n_periods; ++N) {
    rep.periods.push_back(N);
    rep.norm_estimates.push_back(est[N]);
    double env = est[N] * (N + 1.0) * std::pow(std::log(N + M_E), 2.0);
    rep.envelope_constant = std::max(rep.envelope_constant, env);
    (N <= 3 * n_periods / 4 ? env_early : env_late) =
        std::max(N <= 3 * n_periods / 4 ? env_early : env_late, env);
  }
  rep.envelope_bounded = env_late <= env_early * 1.05 + 1e-12;
  return rep;
}

SweepReport theorem6_sweep(const GluedFamily& fam, const SweepOptions& opt) {
  if (opt.total_periods.empty()) throw ParameterError("theorem6_sweep: no periods given");
  SweepReport rep;

  // Shared grid; psi of the localization identity must fit, with the plateau
  // covering the lattice cone (one layer per step) of the transient support.
  auto grid = std::make_shared<Grid>(make_grid(fam.static_metric.dim, opt.half_width, opt.cells));
  const int k1 = opt.steps_per_splice;
  const double plateau_lattice = fam.transient_radius + (k1 + 2) * grid->h;
  const double plateau_paper = fam.static_metric.flat_radius + 0.5 + fam.splice_time;
  rep.psi_plateau = std::max(plateau_lattice, plateau_paper);
  rep.psi_support = rep.psi_plateau + 4.0 * grid->h;
  if (rep.psi_support > grid->half_width - grid->h) {
    throw ParameterError(
        "theorem6_sweep: grid cannot contain the localization cutoff psi; "
        "requires half_width >= " +
        std::to_string(rep.psi_support + grid->h));
  }
  GridWeight psi = radial_cutoff(*grid, rep.psi_plateau, rep.psi_support);

  for (double T : opt.total_periods) {
    GluedFamily f = fam;
    f.total_period = T;
    Scenario glued = glued_scenario(f);
    glued.label = "glued-T" + fmt_g17(T / fam.splice_time);
    const int steps_per_period =
        static_cast<int>(std::llround(T / fam.splice_time)) * opt.steps_per_splice;

    StepPlan plan;
    plan.cfl = opt.cfl;
    plan.boundary = BoundaryMode::sponge;
    plan.sponge_width = opt.sponge_width;
    plan.sponge_strength = opt.sponge_strength;
    plan.steps_per_period = steps_per_period;
    auto sp = std::make_shared<const Stepper>(grid, plan, glued);
    const Stepper& stepper = *sp;

    // Static reference propagator V on the same grid/plan.
    Scenario stat;
    stat.metric = fam.static_metric;
    stat.metric.period = T;
    stat.obstacle = fam.obstacle;
    stat.label = "static-reference";
    Stepper vstep(grid, plan, stat);

    SweepEntry entry;
    entry.T = T;

    // Lemma-5 localization identity, bitwise.
    std::mt19937_64 rng(909);
    for (int pbi = 0; pbi < opt.lemma5_probes; ++pbi) {
      WaveState g = stepper.random_state(rng, nullptr, 0);
      auto diff_after_splice = [&](const WaveState& init) {
        WaveState a = stepper.evolve(init, k1);
        WaveState b = vstep.evolve(init, k1);
        for (std::size_t i = 0; i < a.u.size(); ++i) {
          a.u[i] -= b.u[i];
          a.v[i] -= b.v[i];
        }
        return a;
      };
      WaveState w = diff_after_splice(g);
      double r1 = 0.0;
      for (std::size_t i = 0; i < w.u.size(); ++i) {
        if (psi[i] < 1.0)
          r1 = std::max({r1, std::abs(w.u[i]), std::abs(w.v[i])});
      }
      WaveState g2 = g;
      for (std::size_t i = 0; i < g2.u.size(); ++i) {
        g2.u[i] *= (1.0 - psi[i]);
        g2.v[i] *= (1.0 - psi[i]);
      }
      WaveState w2 = diff_after_splice(g2);
      double r2 = 0.0;
      for (std::size_t i = 0; i < w2.u.size(); ++i)
        r2 = std::max({r2, std::abs(w2.u[i]), std::abs(w2.v[i])});
      entry.lemma5_residual = std::max({entry.lemma5_residual, r1, r2});
    }

    // Spectral gap from the absorbing compression.
    FloquetOperator M(sp);
    PoleReport poles = detect_poles(M, opt.arnoldi);
    entry.delta_est = poles.delta_est;

    // Fitted decay rate on the same operator.
    CutoffPair cut = default_cutoffs(*sp);
    DecayProfile prof = decay_profile(*sp, cut.psi1, opt.decay);
    RateFit fit = fit_rate(prof, RateModel::exp);
    entry.delta_fit = fit.rate;
    entry.fit_residual = fit.residual;

    rep.entries.push_back(entry);
  }

  rep.t_star = rep.entries.back().T;
  for (auto it = rep.entries.rbegin(); it != rep.entries.rend(); ++it) {
    if (it->delta_est >= 0.0)
      rep.t_star = it->T;
    else
      break;
  }
  return rep;
}

}  // namespace wavelab
