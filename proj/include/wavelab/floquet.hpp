#pragma once

#include <complex>
#include <memory>

#include <Eigen/Dense>

#include "wavelab/evolve.hpp"

namespace wavelab {

using Complex = std::complex<double>;
using CVec = std::vector<Complex>;

// Matrix-free real linear operator on R^dim.
struct LinearMap {
  std::size_t dim = 0;
  std::function<void(const double*, double*)> apply;
};

// One-period evolution map M = U(T,0) as a linear operator on the
// concatenated (u, v) cell vector. Applying it twice equals evolving over
// [0, 2T] because the schedule is phase-periodic.
class FloquetOperator {
 public:
  explicit FloquetOperator(std::shared_ptr<const Stepper> st) : st_(std::move(st)) {}

  const Stepper& stepper() const { return *st_; }
  std::shared_ptr<const Stepper> stepper_ptr() const { return st_; }
  std::size_t dim() const { return st_->vector_dim(); }

  WaveState apply(const WaveState& f) const;
  void apply_vec(const double* in, double* out) const;
  LinearMap map() const;
  // psi1 M psi2 as a LinearMap (absorbing-compression spectpreviews).
  LinearMap compressed_map(const GridWeight& psi1, const GridWeight& psi2) const;

 private:
  std::shared_ptr<const Stepper> st_;
};

// Smooth cutoff weights for the cut-off resolvent; default plateau |x|<=rho,
// support |x|<=rho+1.
struct CutoffPair {
  GridWeight psi1, psi2;
  double plateau = 0.0, support = 0.0;
};
CutoffPair default_cutoffs(const Stepper& st);

struct SpectrumReport {
  struct Entry {
    Complex mu;
    double residual = 0.0;
  };
  std::vector<Entry> eigs;  // sorted by |mu| desc, then Re desc, then Im desc
  double spectral_radius = 0.0;
  int krylov_dim = 0;
  bool converged = true;
  // theta = i Log mu on the principal branch: Re in (-pi, pi], Im = ln|mu|.
  static Complex theta_of(Complex mu);
};

struct ArnoldiOptions {
  int count = 6;        // wanted eigenpairs
  double tol = 1e-9;    // residual tolerance, relative to max(1, |mu|)
  int max_dim = 80;     // Krylov dimension per round
  int restarts = 8;
  std::uint64_t seed = 12345;
};

// Restarted Arnoldi (real arithmetic, complex Ritz extraction) for the
// dominant eigenvalues of a matrix-free map. Residual certificates come from
// the Arnoldi relation. Optionally returns the Ritz vectors.
SpectrumReport arnoldi_spectrum(const LinearMap& M, const ArnoldiOptions& opt,
                                std::vector<CVec>* vectors = nullptr);

// Columns are M applied to canonical basis vectors; guarded to dim <= 20000.
Eigen::MatrixXd dense_floquet_matrix(const LinearMap& M);

enum class ResolventMethod { series, solve };

struct ResolventProbe {
  Complex theta{0, 0};
  ResolventMethod method = ResolventMethod::series;
  int terms = 0;            // series terms used
  double tail_bound = 0.0;  // geometric tail certificate (series)
  double residual = 0.0;    // worst linear-solve residual (solve)
  std::vector<CVec> results;
  double norm_estimate = 0.0;  // max ||result|| / ||rhs||
};

// Truncated Neumann series -e^{i theta} sum_N psi1 M^N psi2 f e^{iN theta}.
// Refuses when Im theta <= A_fit * T (violated bound quoted in the error).
ResolventProbe resolvent_series(const FloquetOperator& M, const CutoffPair& cut, Complex theta,
                                int n_max, const std::vector<std::vector<double>>& rhs,
                                const NormEstimate& fit, double tol = 1e-12);

// Iterative solve of (M - e^{-i theta}) x = psi2 f, then psi1 x. Near-singular
// systems raise NumericalError carrying the nearest eigenvalue when a
// spectrum report is supplied.
ResolventProbe resolvent_solve(const FloquetOperator& M, const CutoffPair& cut, Complex theta,
                               const std::vector<std::vector<double>>& rhs, double tol = 1e-10,
                               const SpectrumReport* spectrum = nullptr);

struct PoleRecord {
  Complex mu;
  Complex theta;
  double residual = 0.0;
  double interior_fraction = 0.0;
  bool flagged = false;  // Im theta >= 0: (H2) violation
};

struct PoleReport {
  std::vector<PoleRecord> poles;     // interior-coupled modes inside the strip
  std::vector<PoleRecord> rejected;  // sponge-localized artifacts
  double delta_est = 0.0;            // -max Im theta over retained poles
  bool any_flagged = false;
  double interior_threshold = 0.0;
  double sponge_strength = 0.0;
  std::string scenario_label;
};

// Absorbing-compression surrogate for resolvent poles: Arnoldi spectrum of
// the sponge-mode Floquet map, mapped to theta and filtered by the share of
// eigenvector mass inside |x| <= rho+1. Requires a sponge-mode stepper.
PoleReport detect_poles(const FloquetOperator& M, const ArnoldiOptions& opt,
                        double strip_min_im = -10.0, double interior_threshold = 1e-3);

// Fourier-Bloch-Gelfand partial sum F'[gamma_1 psi1 U psi2](T, theta)
// evaluated on the lattice: sum_{k>=-1}^{K} gamma_1(T+kT) psi1 U(T+kT,0) psi2
// f e^{ik theta}, scaled by e^{i theta}. Equals -e^{-i theta} R(theta) f.
CVec fbg_series(const FloquetOperator& M, const CutoffPair& cut, Complex theta, int k_max,
                const std::vector<double>& f, const NormEstimate& fit);

// GMRES for (M - z I) x = b in complex arithmetic over the real map M.
struct GmresResult {
  CVec x;
  double rel_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};
GmresResult gmres_shifted(const LinearMap& M, Complex z, const CVec& b, double tol,
                          int restart = 80, int max_iter = 800);

}  // namespace wavelab
