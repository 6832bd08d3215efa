#include "wavelab/floquet.hpp"

#include <algorithm>
#include <cmath>

namespace wavelab {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

double l2(const CVec& x) {
  double s = 0.0;
  for (const auto& c : x) s += std::norm(c);
  return std::sqrt(s);
}

double l2(const std::vector<double>& x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return std::sqrt(s);
}

// gamma_1 of the one-period cutoff family: 1 for s >= -T/20, 0 for s <= -T/10.
double gamma1(double s, double T) {
  return smooth_step_down((-s / T - 0.05) / 0.05);
}

void weight_vector(const Stepper& st, const GridWeight& w, const double* in, double* out) {
  WaveState s = st.from_vector(in);
  st.apply_weight(s, w);
  st.to_vector(s, out);
}

}  // namespace

WaveState FloquetOperator::apply(const WaveState& f) const {
  if (f.step_index % st_->plan().steps_per_period != 0)
    throw ParameterError("apply_floquet: state must sit on a period boundary");
  return st_->evolve(f, f.step_index + st_->plan().steps_per_period);
}

void FloquetOperator::apply_vec(const double* in, double* out) const {
  WaveState s = st_->from_vector(in, 0);
  s = st_->evolve(s, st_->plan().steps_per_period);
  st_->to_vector(s, out);
}

LinearMap FloquetOperator::map() const {
  auto st = st_;
  return {dim(), [st](const double* in, double* out) {
            WaveState s = st->from_vector(in, 0);
            s = st->evolve(s, st->plan().steps_per_period);
            st->to_vector(s, out);
          }};
}

LinearMap FloquetOperator::compressed_map(const GridWeight& psi1, const GridWeight& psi2) const {
  auto st = st_;
  return {dim(), [st, psi1, psi2](const double* in, double* out) {
            const std::size_t n = st->vector_dim();
            std::vector<double> tmp(n), mid(n);
            weight_vector(*st, psi2, in, tmp.data());
            WaveState s = st->from_vector(tmp.data(), 0);
            s = st->evolve(s, st->plan().steps_per_period);
            st->to_vector(s, mid.data());
            weight_vector(*st, psi1, mid.data(), out);
          }};
}

CutoffPair default_cutoffs(const Stepper& st) {
  const double rho = st.scenario().metric.flat_radius;
  CutoffPair c;
  c.plateau = rho;
  c.support = rho + 1.0;
  c.psi1 = radial_cutoff(st.grid(), c.plateau, c.support);
  c.psi2 = c.psi1;
  return c;
}

Complex SpectrumReport::theta_of(Complex mu) {
  // e^{-i theta} = mu  =>  theta = i Log mu, principal branch.
  if (mu == Complex(0, 0)) return {0.0, -std::numeric_limits<double>::infinity()};
  return Complex(0, 1) * std::log(mu);
}

SpectrumReport arnoldi_spectrum(const LinearMap& M, const ArnoldiOptions& opt,
                                std::vector<CVec>* vectors) {
  const std::size_t n = M.dim;
  const int m_req = static_cast<int>(std::min<std::size_t>(opt.max_dim, n));
  if (m_req < 1) throw ParameterError("arnoldi_spectrum: empty operator");
  std::mt19937_64 rng(opt.seed);

  VectorXd v0(n);
  for (std::size_t i = 0; i < n; ++i) v0[i] = uniform(rng, -1.0, 1.0);
  v0.normalize();

  SpectrumReport rep;
  std::vector<VectorXd> V;
  MatrixXd H;
  Eigen::EigenSolver<MatrixXd> es;
  std::vector<int> order;

  for (int round = 0; round < std::max(1, opt.restarts); ++round) {
    V.assign(1, v0);
    H = MatrixXd::Zero(m_req + 1, m_req);
    int m = m_req;
    bool breakdown = false;
    for (int j = 0; j < m_req; ++j) {
      VectorXd w(n);
      M.apply(V[j].data(), w.data());
      double w0 = w.norm();
      for (int pass = 0; pass < 2; ++pass) {  // CGS with reorthogonalization
        for (int i = 0; i <= j; ++i) {
          double hij = V[i].dot(w);
          w -= hij * V[i];
          H(i, j) += hij;
        }
      }
      double hs = w.norm();
      H(j + 1, j) = hs;
      if (hs <= 1e-12 * std::max(1.0, w0)) {
        m = j + 1;
        breakdown = true;
        break;
      }
      V.push_back(w / hs);
    }

    es.compute(H.topLeftCorner(m, m));
    if (es.info() != Eigen::Success)
      throw NumericalError("arnoldi_spectrum: Hessenberg eigensolve failed");
    const double hlast = breakdown ? 0.0 : H(m, m - 1);

    rep.eigs.clear();
    order.clear();
    for (int i = 0; i < m; ++i) order.push_back(i);
    auto key = [&](int i) {
      Complex mu = es.eigenvalues()[i];
      return std::tuple<double, double, double>(-std::abs(mu), -mu.real(), -mu.imag());
    };
    std::sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });
    for (int i : order) {
      Complex mu = es.eigenvalues()[i];
      double res = std::abs(hlast) * std::abs(es.eigenvectors().col(i)[m - 1]);
      rep.eigs.push_back({mu, res});
    }
    rep.krylov_dim = m;
    rep.spectral_radius = rep.eigs.empty() ? 0.0 : std::abs(rep.eigs.front().mu);

    const int k = std::min(opt.count, static_cast<int>(rep.eigs.size()));
    rep.converged = true;
    for (int i = 0; i < k; ++i) {
      if (rep.eigs[i].residual > opt.tol * std::max(1.0, std::abs(rep.eigs[i].mu)))
        rep.converged = false;
    }
    if (rep.converged || breakdown || round + 1 == std::max(1, opt.restarts)) {
      if (vectors) {
        vectors->clear();
        for (int i : order) {
          VectorXcd y = es.eigenvectors().col(i);
          CVec x(n, Complex(0, 0));
          for (int j = 0; j < m; ++j) {
            Complex c = y[j];
            for (std::size_t r = 0; r < n; ++r) x[r] += c * V[j][r];
          }
          vectors->push_back(std::move(x));
          if (static_cast<int>(vectors->size()) >= std::max(opt.count, 2 * opt.count)) break;
        }
      }
      if (!rep.converged && !breakdown) rep.converged = false;
      return rep;
    }

    // Explicit restart from the span of the wanted Ritz vectors.
    VectorXd next = VectorXd::Zero(n);
    for (int i = 0; i < k; ++i) {
      VectorXcd y = es.eigenvectors().col(order[i]);
      for (int j = 0; j < m; ++j) {
        next += y[j].real() * V[j];
        next += y[j].imag() * V[j];
      }
    }
    double nn = next.norm();
    if (nn < 1e-12) {
      for (std::size_t i = 0; i < n; ++i) next[i] = uniform(rng, -1.0, 1.0);
      nn = next.norm();
    }
    v0 = next / nn;
  }
  return rep;  // unreachable
}

Eigen::MatrixXd dense_floquet_matrix(const LinearMap& M) {
  if (M.dim > 20000)
    throw ParameterError("dense_floquet_matrix: state dimension exceeds 20000");
  const auto n = static_cast<Eigen::Index>(M.dim);
  MatrixXd A(n, n);
  std::vector<double> e(M.dim, 0.0), col(M.dim);
  for (Eigen::Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    M.apply(e.data(), col.data());
    e[j] = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) A(i, j) = col[i];
  }
  return A;
}

ResolventProbe resolvent_series(const FloquetOperator& M, const CutoffPair& cut, Complex theta,
                                int n_max, const std::vector<std::vector<double>>& rhs,
                                const NormEstimate& fit, double tol) {
  const Stepper& st = M.stepper();
  const double T = st.period();
  const double bound = fit.A * T;
  if (theta.imag() <= bound)
    throw ParameterError("resolvent_series: requires Im theta > A_fit*T = " +
                         std::to_string(bound) + ", got Im theta = " +
                         std::to_string(theta.imag()));
  const double ratio = std::exp(bound - theta.imag());  // |e^{i theta}| damping per term

  ResolventProbe probe;
  probe.theta = theta;
  probe.method = ResolventMethod::series;

  const std::size_t n = M.dim();
  const Complex w = std::exp(Complex(0, 1) * theta);
  double worst_tail = 0.0;
  int max_terms = 0;
  for (const auto& f : rhs) {
    if (f.size() != n) throw ParameterError("resolvent_series: rhs dimension mismatch");
    std::vector<double> term(n), cut_term(n);
    weight_vector(st, cut.psi2, f.data(), term.data());
    const double g_energy = st.paper_norm(st.from_vector(term.data()));
    CVec acc(n, Complex(0, 0));
    Complex coef(1.0, 0.0);  // e^{iN theta}
    int N = 0;
    double tail = 0.0;
    for (;;) {
      weight_vector(st, cut.psi1, term.data(), cut_term.data());
      for (std::size_t i = 0; i < n; ++i) acc[i] += coef * cut_term[i];
      tail = fit.B * g_energy * std::pow(ratio, N + 1) / (1.0 - ratio);
      if (N >= n_max || (tail <= tol * std::max(1e-300, g_energy))) break;
      std::vector<double> next(n);
      M.apply_vec(term.data(), next.data());
      term.swap(next);
      coef *= w;
      ++N;
    }
    const Complex front = -w;
    for (auto& c : acc) c *= front;
    probe.norm_estimate = std::max(probe.norm_estimate, l2(acc) / std::max(1e-300, l2(f)));
    probe.results.push_back(std::move(acc));
    worst_tail = std::max(worst_tail, tail);
    max_terms = std::max(max_terms, N + 1);
  }
  probe.terms = max_terms;
  probe.tail_bound = worst_tail;
  return probe;
}

GmresResult gmres_shifted(const LinearMap& M, Complex z, const CVec& b, double tol, int restart,
                          int max_iter) {
  const std::size_t n = M.dim;
  auto apply_shifted = [&](const VectorXcd& x, VectorXcd& y) {
    std::vector<double> re(n), im(n), mre(n), mim(n);
    for (std::size_t i = 0; i < n; ++i) {
      re[i] = x[i].real();
      im[i] = x[i].imag();
    }
    M.apply(re.data(), mre.data());
    M.apply(im.data(), mim.data());
    for (std::size_t i = 0; i < n; ++i) y[i] = Complex(mre[i], mim[i]) - z * x[i];
  };

  VectorXcd bv(n);
  for (std::size_t i = 0; i < n; ++i) bv[i] = b[i];
  const double bnorm = bv.norm();
  GmresResult out;
  out.x.assign(n, Complex(0, 0));
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }

  VectorXcd x = VectorXcd::Zero(n);
  int iters = 0;
  while (iters < max_iter) {
    VectorXcd r(n);
    apply_shifted(x, r);
    r = bv - r;
    double beta = r.norm();
    if (beta <= tol * bnorm) break;
    const int m = std::min<int>(restart, max_iter - iters);
    std::vector<VectorXcd> V{r / beta};
    MatrixXcd H = MatrixXcd::Zero(m + 1, m);
    int j_used = 0;
    VectorXcd y;
    for (int j = 0; j < m; ++j) {
      VectorXcd w(n);
      apply_shifted(V[j], w);
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          Complex hij = V[i].dot(w);  // conjugate dot
          w -= hij * V[i];
          H(i, j) += hij;
        }
      }
      double hs = w.norm();
      H(j + 1, j) = hs;
      ++iters;
      j_used = j + 1;
      // Small least squares for the current residual estimate.
      MatrixXcd Hj = H.topLeftCorner(j + 2, j + 1);
      VectorXcd rhs = VectorXcd::Zero(j + 2);
      rhs[0] = beta;
      y = Hj.colPivHouseholderQr().solve(rhs);
      double res = (Hj * y - rhs).norm();
      if (res <= 0.9 * tol * bnorm || hs <= 1e-14 * bnorm || j + 1 == m) break;
      V.push_back(w / hs);
    }
    for (int j = 0; j < j_used; ++j) x += y[j] * V[j];
  }
  VectorXcd r(n);
  apply_shifted(x, r);
  out.rel_residual = (bv - r).norm() / bnorm;
  out.iterations = iters;
  out.converged = out.rel_residual <= tol * 1.5;
  for (std::size_t i = 0; i < n; ++i) out.x[i] = x[i];
  return out;
}

ResolventProbe resolvent_solve(const FloquetOperator& M, const CutoffPair& cut, Complex theta,
                               const std::vector<std::vector<double>>& rhs, double tol,
                               const SpectrumReport* spectrum) {
  const Stepper& st = M.stepper();
  const Complex z = std::exp(Complex(0, -1) * theta);
  if (spectrum) {
    double dmin = std::numeric_limits<double>::infinity();
    Complex nearest{0, 0};
    for (const auto& e : spectrum->eigs) {
      double d = std::abs(e.mu - z);
      if (d < dmin) {
        dmin = d;
        nearest = e.mu;
      }
    }
    if (dmin <= 1e-8 * (1.0 + std::abs(z)))
      throw NumericalError("resolvent_solve: e^{-i theta} within tolerance of eigenvalue mu=(" +
                           std::to_string(nearest.real()) + "," + std::to_string(nearest.imag()) +
                           ")");
  }
  ResolventProbe probe;
  probe.theta = theta;
  probe.method = ResolventMethod::solve;
  const std::size_t n = M.dim();
  LinearMap map = M.map();
  for (const auto& f : rhs) {
    if (f.size() != n) throw ParameterError("resolvent_solve: rhs dimension mismatch");
    std::vector<double> g(n);
    weight_vector(st, cut.psi2, f.data(), g.data());
    CVec b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = g[i];
    GmresResult sol = gmres_shifted(map, z, b, tol);
    if (!sol.converged) {
      std::string msg = "resolvent_solve: iteration stalled (residual " +
                        std::to_string(sol.rel_residual) + "), theta likely near a pole";
      if (spectrum && !spectrum->eigs.empty()) {
        Complex nearest = spectrum->eigs.front().mu;
        double dmin = std::numeric_limits<double>::infinity();
        for (const auto& e : spectrum->eigs) {
          double d = std::abs(e.mu - z);
          if (d < dmin) {
            dmin = d;
            nearest = e.mu;
          }
        }
        msg += "; nearest eigenvalue (" + std::to_string(nearest.real()) + "," +
               std::to_string(nearest.imag()) + ")";
      }
      throw NumericalError(msg);
    }
    probe.residual = std::max(probe.residual, sol.rel_residual);
    // psi1 applied to the complex solution componentwise.
    std::vector<double> re(n), im(n), wre(n), wim(n);
    for (std::size_t i = 0; i < n; ++i) {
      re[i] = sol.x[i].real();
      im[i] = sol.x[i].imag();
    }
    weight_vector(st, cut.psi1, re.data(), wre.data());
    weight_vector(st, cut.psi1, im.data(), wim.data());
    CVec res(n);
    for (std::size_t i = 0; i < n; ++i) res[i] = Complex(wre[i], wim[i]);
    probe.norm_estimate = std::max(probe.norm_estimate, l2(res) / std::max(1e-300, l2(f)));
    probe.results.push_back(std::move(res));
  }
  return probe;
}

PoleReport detect_poles(const FloquetOperator& M, const ArnoldiOptions& opt, double strip_min_im,
                        double interior_threshold) {
  const Stepper& st = M.stepper();
  if (st.plan().boundary != BoundaryMode::sponge)
    throw ParameterError("detect_poles requires the sponge boundary mode");
  std::vector<CVec> vecs;
  SpectrumReport spec = arnoldi_spectrum(M.map(), opt, &vecs);

  PoleReport rep;
  rep.interior_threshold = interior_threshold;
  rep.sponge_strength = st.plan().sponge_strength;
  rep.scenario_label = st.scenario().label;

  // Interior indicator over the vector layout (u block then v block).
  const Grid& g = st.grid();
  const double r_in = st.scenario().metric.flat_radius + 1.0;
  std::vector<std::uint8_t> inside(st.vector_dim() / 2, 0);
  std::size_t c = 0;
  for (int k = 0; k < g.cells[2]; ++k)
    for (int j = 0; j < g.cells[1]; ++j)
      for (int i = 0; i < g.cells[0]; ++i) inside[c++] = norm(g.center(i, j, k)) <= r_in ? 1 : 0;

  double max_im = -std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < spec.eigs.size() && e < vecs.size(); ++e) {
    const auto& entry = spec.eigs[e];
    if (entry.residual > 1e-6 * std::max(1.0, std::abs(entry.mu))) continue;
    Complex theta = SpectrumReport::theta_of(entry.mu);
    if (!(theta.imag() >= strip_min_im)) continue;
    double m_in = 0.0, m_tot = 0.0;
    const CVec& x = vecs[e];
    const std::size_t half = x.size() / 2;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double mass = std::norm(x[i]);
      m_tot += mass;
      if (inside[i % half]) m_in += mass;
    }
    PoleRecord rec;
    rec.mu = entry.mu;
    rec.theta = theta;
    rec.residual = entry.residual;
    rec.interior_fraction = m_tot > 0 ? m_in / m_tot : 0.0;
    rec.flagged = theta.imag() >= 0.0;
    if (rec.interior_fraction >= interior_threshold) {
      rep.poles.push_back(rec);
      rep.any_flagged = rep.any_flagged || rec.flagged;
      max_im = std::max(max_im, theta.imag());
    } else {
      rep.rejected.push_back(rec);
    }
  }
  rep.delta_est = std::isfinite(max_im) ? -max_im : 0.0;
  return rep;
}

CVec fbg_series(const FloquetOperator& M, const CutoffPair& cut, Complex theta, int k_max,
                const std::vector<double>& f, const NormEstimate& fit) {
  const Stepper& st = M.stepper();
  const double T = st.period();
  if (theta.imag() <= fit.A * T)
    throw ParameterError("fbg_series: requires Im theta > A_fit*T = " +
                         std::to_string(fit.A * T));
  const std::size_t n = M.dim();
  std::vector<double> cur(n), weighted(n);
  weight_vector(st, cut.psi2, f.data(), cur.data());

  CVec acc(n, Complex(0, 0));
  const Complex w = std::exp(Complex(0, 1) * theta);
  // k = -1 term: gamma_1(0) psi1 psi2 f e^{-i theta}
  Complex coef = std::exp(Complex(0, -1) * theta) * gamma1(0.0, T);
  weight_vector(st, cut.psi1, cur.data(), weighted.data());
  for (std::size_t i = 0; i < n; ++i) acc[i] += coef * weighted[i];
  // k >= 0: gamma_1((k+1) T) = 1
  coef = Complex(1.0, 0.0);
  for (int k = 0; k <= k_max; ++k) {
    std::vector<double> next(n);
    M.apply_vec(cur.data(), next.data());
    cur.swap(next);
    weight_vector(st, cut.psi1, cur.data(), weighted.data());
    Complex gk = coef * gamma1((k + 1) * T, T);
    for (std::size_t i = 0; i < n; ++i) acc[i] += gk * weighted[i];
    coef *= w;
  }
  for (auto& cc : acc) cc *= w;  // F' phase e^{i theta t / T} at t = T
  return acc;
}

}  // namespace wavelab
