#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "wavelab/grid.hpp"

namespace wavelab {

enum class EnergyVariant {
  paper,            // |grad u|^2 + u_t^2
  metric,           // a |grad u|^2 + u_t^2
  metric_discrete,  // metric form minus the leapfrog correction; the stepper
                    // conserves this one exactly for static coefficients
};

struct EnergyReading {
  double value = 0.0;
  std::string region = "grid";
  EnergyVariant variant = EnergyVariant::paper;
};

// Discrete propagator for the mixed problem: kick-drift-kick leapfrog with
// face-averaged coefficients a(t_k, x), per-step Dirichlet cell masking from
// the obstacle motion, and a reflecting or sponge outer boundary. Coefficient
// and mask arrays are cached per schedule phase (k mod N_T), so step k and
// step k + N_T use identical objects and the discrete map is exactly
// T-periodic.
class Stepper {
 public:
  Stepper(std::shared_ptr<const Grid> grid, StepPlan plan, Scenario scenario);

  const Grid& grid() const { return *grid_; }
  std::shared_ptr<const Grid> grid_ptr() const { return grid_; }
  const StepPlan& plan() const { return plan_; }
  const Scenario& scenario() const { return scenario_; }
  double dt() const { return plan_.dt; }
  double period() const { return scenario_.period(); }

  WaveState make_state(std::int64_t index = 0) const;
  // u0/v0 sampled at cell centers, then masked.
  WaveState make_state(const std::function<double(const Vec3&)>& u0,
                       const std::function<double(const Vec3&)>& v0,
                       std::int64_t index = 0) const;

  void step_inplace(WaveState& s) const;
  WaveState step(const WaveState& s) const;
  // Composition of single steps from the state's index up to target_index.
  WaveState evolve(const WaveState& s, std::int64_t target_index) const;
  WaveState evolve_to(const WaveState& s, double t_target) const;
  std::int64_t lattice_index(double t) const;

  // Component propagator V(t,s): evolves data (0,h).
  WaveState component_v(const std::function<double(const Vec3&)>& h, std::int64_t s_index,
                        std::int64_t t_index) const;

  using Source = std::function<double(double, const Vec3&)>;
  // Inhomogeneous problem with zero data, by direct stepping with source
  // kicks, and by composing component_v over the tau lattice (cross-check).
  WaveState duhamel_direct(const Source& g, std::int64_t s_index, std::int64_t t_index) const;
  WaveState duhamel_quadrature(const Source& g, std::int64_t s_index, std::int64_t t_index) const;

  EnergyReading energy(const WaveState& s, const GridWeight* cutoff,
                       EnergyVariant variant = EnergyVariant::paper) const;
  double paper_norm(const WaveState& s) const;  // sqrt of paper energy

  // Uniform random fields on active cells, optionally shaped by a weight,
  // normalized to unit paper norm.
  WaveState random_state(std::mt19937_64& rng, const GridWeight* shape = nullptr,
                         std::int64_t index = 0) const;

  void apply_weight(WaveState& s, const GridWeight& w) const;

  // Linear-algebra view: concatenated (u, v) over logical cells.
  std::size_t vector_dim() const { return 2 * grid_->cell_count; }
  void to_vector(const WaveState& s, double* out) const;
  WaveState from_vector(const double* in, std::int64_t index = 0) const;

  int phase(std::int64_t index) const {
    int p = static_cast<int>(index % plan_.steps_per_period);
    return p < 0 ? p + plan_.steps_per_period : p;
  }
  bool has_obstacle() const { return !masks_.empty(); }
  const std::vector<std::uint8_t>* mask(int phase) const {
    return masks_.empty() ? nullptr : masks_[phase].get();
  }

 private:
  struct Coeffs {
    bool unit = true;                 // a == 1 at this phase
    std::shared_ptr<const std::vector<double>> a;  // cell-centered, padded
  };
  void kick(std::vector<double>& v, const std::vector<double>& u, const Coeffs& c,
            double factor, const std::vector<std::uint8_t>* mask,
            const Source* g, double t_sample) const;
  void drift(std::vector<double>& u, const std::vector<double>& v) const;
  void damp(WaveState& s) const;
  void apply_mask(WaveState& s, const std::vector<std::uint8_t>& m) const;
  void step_with_source(WaveState& s, const Source* g) const;
  double quad_form(const WaveState& s, const GridWeight* cutoff, bool metric_weighted,
                   bool discrete_correction) const;

  std::shared_ptr<const Grid> grid_;
  StepPlan plan_;
  Scenario scenario_;
  std::vector<Coeffs> coeffs_;                                   // per phase 0..N_T-1
  std::vector<std::shared_ptr<std::vector<std::uint8_t>>> masks_;  // empty if no obstacle
  std::vector<double> damp_;                                     // empty if reflecting
  std::vector<std::pair<std::size_t, std::size_t>> chunks_;      // slab ranges (outer axis)
};

// Randomized lower estimate of the propagator norm over [s_index, t_index],
// with (B, A) fitted so that every sample satisfies est <= B e^{A t}.
struct NormEstimate {
  double B = 1.0;
  double A = 0.0;
  std::vector<std::pair<double, double>> samples;  // (t - s, estimate)
  double value = 1.0;                              // estimate at t_index
};
NormEstimate operator_norm_estimate(const Stepper& st, std::int64_t s_index,
                                    std::int64_t t_index, int trials, std::uint64_t seed);

}  // namespace wavelab
