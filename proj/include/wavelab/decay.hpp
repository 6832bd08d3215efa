#pragma once

#include <string>
#include <vector>

#include "wavelab/floquet.hpp"

namespace wavelab {

// Local-energy traces E(t_k) = ||chi U(t_k,0) f||^2 (paper norm, squared) for
// an ensemble of unit-norm initial states supported in supp chi.
struct DecayProfile {
  std::string scenario_label;
  std::string cutoff_desc;
  std::vector<double> times;
  std::vector<double> e_mean;
  std::vector<double> e_max;  // member-wise max: operator-norm proxy
  int ensemble = 0;
  double period = 1.0;
};

enum class RateModel { exp, even, growth };

struct RateFit {
  RateModel model = RateModel::exp;
  double amplitude = 0.0;     // C
  double rate = 0.0;          // delta or gamma (norm rate, clamped >= 0)
  double residual = 0.0;      // RMS residual in log scale
  double window_start = 0.0;
  double window_end = 0.0;
  double bounded_stat = 0.0;  // even model: max/mean of E (t+1)^2 ln^4(t+e)
  int points = 0;
};

struct DecayOptions {
  double horizon = 20.0;
  int ensemble = 32;
  int sample_stride = 0;  // steps between samples; 0 = one period
  std::uint64_t seed = 2024;
};

// Refuses reflecting-mode horizons long enough for outer reflections to
// re-enter the cutoff region (quotes the safe horizon).
DecayProfile decay_profile(const Stepper& st, const GridWeight& chi, const DecayOptions& opt,
                           const std::vector<WaveState>* extra_members = nullptr);

// Least squares in log scale on the max series (operator-norm proxy).
// window_start < 0 selects the default transient cut 2T. Samples below
// 1e-24 * E(first) are treated as numerical floor and excluded.
RateFit fit_rate(const DecayProfile& p, RateModel model, double window_start = -1.0,
                 bool use_max = true);

// Randomized probe of ||psi1 U(NT,0) psi2|| over a period range, the
// (N+1)ln^2(N+e) envelope of estimate (a), and boundedness of the partial
// resolvent sums just above the real axis.
struct SeriesDecayReport {
  std::vector<int> periods;
  std::vector<double> norm_estimates;
  double envelope_constant = 0.0;  // sup of est * (N+1) ln^2(N+e)
  bool envelope_bounded = true;    // no late-time growth of the envelope
  double partial_sum_sup = 0.0;
  bool partial_sums_bounded = true;
};
SeriesDecayReport series_decay_check(const FloquetOperator& M, const CutoffPair& cut, int n_periods,
                                     int probes, double eps_im, std::uint64_t seed);

// Theorem-6 style sweep over total periods of a glued family: the splice
// localization identity (checked bitwise), the spectral gap delta_est(T), and
// the fitted decay rate delta_fit(T) on one shared grid/plan.
struct SweepEntry {
  double T = 0.0;
  double delta_est = 0.0;       // per period: -ln(max |mu|)
  double delta_fit = 0.0;       // per unit time, from the decay profile
  double lemma5_residual = 0.0; // max |(1-psi)(U-V)g| and |(U-V)(1-psi)g|
  double fit_residual = 0.0;
};

struct SweepOptions {
  std::vector<double> total_periods;
  int cells = 48;
  double half_width = 6.0;
  double cfl = 0.9;
  int steps_per_splice = 5;
  int sponge_width = 12;
  double sponge_strength = 3.0;
  int lemma5_probes = 3;
  DecayOptions decay;
  ArnoldiOptions arnoldi;
};

struct SweepReport {
  std::vector<SweepEntry> entries;
  double t_star = 0.0;  // smallest T with delta_est >= 0 from there on
  double psi_plateau = 0.0, psi_support = 0.0;
};

SweepReport theorem6_sweep(const GluedFamily& fam, const SweepOptions& opt);

}  // namespace wavelab
