#include "wavelab/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace wavelab {

namespace {

// Lines = rows along the contiguous x axis; chunks group a fixed number of
// lines so reductions can accumulate per-chunk partials in a fixed order.
constexpr std::size_t kLinesPerChunk = 8;

struct LineWalk {
  const Grid* g;
  std::size_t lines;  // cells[1] * cells[2]
  std::size_t base_of(std::size_t line) const {
    int j = static_cast<int>(line % g->cells[1]);
    int k = static_cast<int>(line / g->cells[1]);
    return g->index(0, j, k);
  }
};

}  // namespace

Stepper::Stepper(std::shared_ptr<const Grid> grid, StepPlan plan, Scenario scenario)
    : grid_(std::move(grid)), plan_(plan), scenario_(std::move(scenario)) {
  const Grid& g = *grid_;
  if (g.dim != scenario_.dim())
    throw ParameterError("grid and scenario dimensions differ");
  if (plan_.steps_per_period < 1) throw ParameterError("steps_per_period must be >= 1");
  if (plan_.cfl <= 0.0 || plan_.cfl > 1.0) throw ParameterError("CFL number must lie in (0,1]");
  const double T = scenario_.period();
  plan_.dt = T / plan_.steps_per_period;
  const double cmax = std::sqrt(g.dim * scenario_.metric.upper_bound);
  if (plan_.dt * cmax > plan_.cfl * g.h * (1.0 + 1e-12))
    throw ParameterError("CFL violation: dt*sqrt(dim*C) > cfl*h; refuse to step");
  if (!(g.half_width > scenario_.metric.flat_radius + 1.0 - 1e-12))
    throw ParameterError("grid half width must exceed rho + 1");

  const int nt = plan_.steps_per_period;
  const MetricField& m = scenario_.metric;

  // Coefficient schedule. Phases inside the static window share one array.
  coeffs_.resize(nt);
  if (m.identically_one) {
    for (auto& c : coeffs_) c.unit = true;
  } else {
    auto sample = [&](double tau) {
      auto arr = std::make_shared<std::vector<double>>(g.volume, 1.0);
      for (int k = -(g.dim >= 3 ? 1 : 0); k < g.cells[2] + (g.dim >= 3 ? 1 : 0); ++k)
        for (int j = -(g.dim >= 2 ? 1 : 0); j < g.cells[1] + (g.dim >= 2 ? 1 : 0); ++j)
          for (int i = -1; i < g.cells[0] + 1; ++i) {
            double a = m.value(tau, g.center(i, j, k));
            if (!std::isfinite(a) || a <= 0.0)
              throw ParameterError("metric evaluator returned a non-positive or non-finite value");
            (*arr)[g.index(i, j, k)] = a;
          }
      return arr;
    };
    if (!m.time_dependent) {
      auto arr = sample(0.0);
      for (auto& c : coeffs_) c = {false, arr};
    } else {
      std::shared_ptr<const std::vector<double>> static_arr;
      if (m.static_from < T) static_arr = sample(m.static_from);
      for (int p = 0; p < nt; ++p) {
        double tau = p * plan_.dt;
        if (tau >= m.static_from && static_arr) {
          coeffs_[p] = {false, static_arr};
        } else {
          coeffs_[p] = {false, sample(tau)};
        }
      }
    }
  }

  // Mask schedule from the obstacle motion.
  if (scenario_.obstacle) {
    const ObstacleMotion& o = *scenario_.obstacle;
    auto build = [&](double tau) {
      auto mk = std::make_shared<std::vector<std::uint8_t>>(g.volume, 1);
      for (int k = 0; k < g.cells[2]; ++k)
        for (int j = 0; j < g.cells[1]; ++j)
          for (int i = 0; i < g.cells[0]; ++i) {
            double d = o.distance(tau, g.center(i, j, k));
            if (!std::isfinite(d))
              throw ParameterError("obstacle distance returned a non-finite value");
            (*mk)[g.index(i, j, k)] = d < 0.0 ? 1 : 0;
          }
      return mk;
    };
    masks_.resize(nt);
    if (!o.moving) {
      auto mk = build(0.0);
      for (auto& mp : masks_) mp = mk;
    } else {
      for (int p = 0; p < nt; ++p) masks_[p] = build(p * plan_.dt);
      // One-cell-layer motion bound: every cell that flips between
      // consecutive phases must touch the previous front.
      auto adjacent = [&](const std::vector<std::uint8_t>& mk, std::size_t idx,
                          std::uint8_t val) {
        for (int d = 0; d < g.dim; ++d) {
          if (mk[idx - g.stride[d]] == val || mk[idx + g.stride[d]] == val) return true;
        }
        return false;
      };
      for (int p = 0; p < nt; ++p) {
        const auto& m0 = *masks_[p];
        const auto& m1 = *masks_[(p + 1) % nt];
        for (int k = 0; k < g.cells[2]; ++k)
          for (int j = 0; j < g.cells[1]; ++j)
            for (int i = 0; i < g.cells[0]; ++i) {
              std::size_t idx = g.index(i, j, k);
              if (m0[idx] != m1[idx] && !adjacent(m0, idx, m1[idx]))
                throw ParameterError(
                    "obstacle mask moves more than one cell layer per step; "
                    "reduce dt or coarsen the grid");
            }
      }
    }
  }

  // Sponge damping factors (graded cubic ramp, per-axis sum).
  if (plan_.boundary == BoundaryMode::sponge) {
    const double w = plan_.sponge_width * g.h;
    if (plan_.sponge_width < 2 || w >= g.half_width)
      throw ParameterError("sponge width must be >= 2 cells and fit inside the box");
    damp_.assign(g.volume, 1.0);
    for (int k = 0; k < g.cells[2]; ++k)
      for (int j = 0; j < g.cells[1]; ++j)
        for (int i = 0; i < g.cells[0]; ++i) {
          Vec3 x = g.center(i, j, k);
          double sig = 0.0;
          for (int d = 0; d < g.dim; ++d) {
            double pen = (std::abs(x[d]) - (g.half_width - w)) / w;
            if (pen > 0.0) sig += pen * pen * pen;
          }
          damp_[g.index(i, j, k)] = std::exp(-plan_.sponge_strength * sig * plan_.dt);
        }
  }

  // Fixed chunking for deterministic parallel reductions.
  LineWalk lw{&g, static_cast<std::size_t>(g.cells[1]) * g.cells[2]};
  for (std::size_t l = 0; l < lw.lines; l += kLinesPerChunk)
    chunks_.emplace_back(l, std::min(lw.lines, l + kLinesPerChunk));
}

WaveState Stepper::make_state(std::int64_t index) const {
  WaveState s;
  s.grid = grid_;
  s.u.assign(grid_->volume, 0.0);
  s.v.assign(grid_->volume, 0.0);
  s.step_index = index;
  s.time = index * plan_.dt;
  s.mask_id = phase(index);
  return s;
}

WaveState Stepper::make_state(const std::function<double(const Vec3&)>& u0,
                              const std::function<double(const Vec3&)>& v0,
                              std::int64_t index) const {
  WaveState s = make_state(index);
  const Grid& g = *grid_;
  const auto* m = mask(phase(index));
  for (int k = 0; k < g.cells[2]; ++k)
    for (int j = 0; j < g.cells[1]; ++j)
      for (int i = 0; i < g.cells[0]; ++i) {
        std::size_t idx = g.index(i, j, k);
        if (m && (*m)[idx]) continue;
        Vec3 x = g.center(i, j, k);
        if (u0) s.u[idx] = u0(x);
        if (v0) s.v[idx] = v0(x);
      }
  return s;
}

void Stepper::kick(std::vector<double>& v, const std::vector<double>& u, const Coeffs& c,
                   double factor, const std::vector<std::uint8_t>* m, const Source* g,
                   double t_sample) const {
  const Grid& gr = *grid_;
  const double s = factor / (gr.h * gr.h);
  const int nx = gr.cells[0];
  const std::ptrdiff_t sy = gr.stride[1], sz = gr.stride[2];
  const int dim = gr.dim;
  LineWalk lw{&gr, static_cast<std::size_t>(gr.cells[1]) * gr.cells[2]};
  const double* up = u.data();
  double* vp = v.data();
  const double* ap = c.unit ? nullptr : c.a->data();
  const std::uint8_t* mp = m ? m->data() : nullptr;

  parallel_for(chunks_.size(), [&](std::size_t ci) {
    auto [lo, hi] = chunks_[ci];
    for (std::size_t line = lo; line < hi; ++line) {
      std::size_t base = lw.base_of(line);
      if (!ap && !mp) {
        // Unit metric, no obstacle: branch-free line update.
        const double two_dim = 2.0 * dim;
        if (dim == 1) {
          for (int i = 0; i < nx; ++i) {
            std::size_t idx = base + i;
            vp[idx] += s * (up[idx - 1] + up[idx + 1] - two_dim * up[idx]);
          }
        } else if (dim == 2) {
          for (int i = 0; i < nx; ++i) {
            std::size_t idx = base + i;
            vp[idx] += s * (up[idx - 1] + up[idx + 1] + up[idx - sy] + up[idx + sy] -
                            two_dim * up[idx]);
          }
        } else {
          for (int i = 0; i < nx; ++i) {
            std::size_t idx = base + i;
            vp[idx] += s * (up[idx - 1] + up[idx + 1] + up[idx - sy] + up[idx + sy] +
                            up[idx - sz] + up[idx + sz] - two_dim * up[idx]);
          }
        }
      } else {
        for (int i = 0; i < nx; ++i) {
          std::size_t idx = base + i;
          if (mp && mp[idx]) continue;
          double acc;
          if (!ap) {
            acc = up[idx - 1] + up[idx + 1] - 2.0 * up[idx];
            if (dim >= 2) acc += up[idx - sy] + up[idx + sy] - 2.0 * up[idx];
            if (dim >= 3) acc += up[idx - sz] + up[idx + sz] - 2.0 * up[idx];
          } else {
            const double ai = ap[idx];
            acc = 0.5 * (ai + ap[idx - 1]) * (up[idx - 1] - up[idx]) +
                  0.5 * (ai + ap[idx + 1]) * (up[idx + 1] - up[idx]);
            if (dim >= 2)
              acc += 0.5 * (ai + ap[idx - sy]) * (up[idx - sy] - up[idx]) +
                     0.5 * (ai + ap[idx + sy]) * (up[idx + sy] - up[idx]);
            if (dim >= 3)
              acc += 0.5 * (ai + ap[idx - sz]) * (up[idx - sz] - up[idx]) +
                     0.5 * (ai + ap[idx + sz]) * (up[idx + sz] - up[idx]);
          }
          vp[idx] += s * acc;
        }
      }
      if (g) {
        int jj = static_cast<int>(line % gr.cells[1]);
        int kk = static_cast<int>(line / gr.cells[1]);
        for (int i = 0; i < nx; ++i) {
          std::size_t idx = base + i;
          if (mp && mp[idx]) continue;
          vp[idx] += factor * (*g)(t_sample, gr.center(i, jj, kk));
        }
      }
    }
  });
}

void Stepper::drift(std::vector<double>& u, const std::vector<double>& v) const {
  const double dt = plan_.dt;
  double* up = u.data();
  const double* vp = v.data();
  const std::size_t n = grid_->volume;
  const std::size_t nchunk = chunks_.size();
  const std::size_t per = (n + nchunk - 1) / nchunk;
  parallel_for(nchunk, [&](std::size_t ci) {
    std::size_t lo = ci * per, hi = std::min(n, lo + per);
    for (std::size_t i = lo; i < hi; ++i) up[i] += dt * vp[i];
  });
}

void Stepper::damp(WaveState& s) const {
  const double* dp = damp_.data();
  double* up = s.u.data();
  double* vp = s.v.data();
  const std::size_t n = grid_->volume;
  const std::size_t nchunk = chunks_.size();
  const std::size_t per = (n + nchunk - 1) / nchunk;
  parallel_for(nchunk, [&](std::size_t ci) {
    std::size_t lo = ci * per, hi = std::min(n, lo + per);
    for (std::size_t i = lo; i < hi; ++i) {
      up[i] *= dp[i];
      vp[i] *= dp[i];
    }
  });
}

void Stepper::apply_mask(WaveState& s, const std::vector<std::uint8_t>& m) const {
  const std::uint8_t* mp = m.data();
  double* up = s.u.data();
  double* vp = s.v.data();
  for (std::size_t i = 0; i < grid_->volume; ++i) {
    if (mp[i]) {
      up[i] = 0.0;
      vp[i] = 0.0;
    }
  }
}

void Stepper::step_with_source(WaveState& s, const Source* g) const {
  for (double x : {s.u[grid_->volume / 2], s.v[grid_->volume / 2]}) {
    if (!std::isfinite(x))
      throw NumericalError("blow-up detected before step " + std::to_string(s.step_index));
  }
  const int p0 = phase(s.step_index);
  const int p1 = phase(s.step_index + 1);
  const auto* m0 = mask(p0);
  const double t0 = s.step_index * plan_.dt;
  const double t1 = (s.step_index + 1) * plan_.dt;
  kick(s.v, s.u, coeffs_[p0], 0.5 * plan_.dt, m0, g, t0);
  drift(s.u, s.v);
  kick(s.v, s.u, coeffs_[p1], 0.5 * plan_.dt, m0, g, t1);
  if (!damp_.empty()) damp(s);
  if (!masks_.empty() && masks_[p1] != masks_[p0]) apply_mask(s, *masks_[p1]);
  ++s.step_index;
  s.time = s.step_index * plan_.dt;
  s.mask_id = p1;
}

void Stepper::step_inplace(WaveState& s) const { step_with_source(s, nullptr); }

WaveState Stepper::step(const WaveState& s) const {
  WaveState out = s;
  step_inplace(out);
  return out;
}

WaveState Stepper::evolve(const WaveState& s, std::int64_t target_index) const {
  if (target_index < s.step_index)
    throw ParameterError("evolve targets must not precede the state time");
  WaveState out = s;
  while (out.step_index < target_index) step_inplace(out);
  return out;
}

std::int64_t Stepper::lattice_index(double t) const {
  double k = t / plan_.dt;
  auto idx = static_cast<std::int64_t>(std::llround(k));
  if (std::abs(k - idx) > 1e-9 * std::max(1.0, std::abs(k)))
    throw ParameterError("time " + std::to_string(t) + " is not on the step lattice");
  return idx;
}

WaveState Stepper::evolve_to(const WaveState& s, double t_target) const {
  return evolve(s, lattice_index(t_target));
}

WaveState Stepper::component_v(const std::function<double(const Vec3&)>& h,
                               std::int64_t s_index, std::int64_t t_index) const {
  WaveState init = make_state(nullptr, h, s_index);
  return evolve(init, t_index);
}

WaveState Stepper::duhamel_direct(const Source& g, std::int64_t s_index,
                                  std::int64_t t_index) const {
  WaveState s = make_state(s_index);
  while (s.step_index < t_index) step_with_source(s, &g);
  return s;
}

WaveState Stepper::duhamel_quadrature(const Source& g, std::int64_t s_index,
                                      std::int64_t t_index) const {
  WaveState acc = make_state(t_index);
  for (std::int64_t k = s_index; k <= t_index; ++k) {
    double wk = (k == s_index || k == t_index) ? 0.5 * plan_.dt : plan_.dt;
    double tk = k * plan_.dt;
    WaveState member = component_v([&](const Vec3& x) { return g(tk, x); }, k, t_index);
    for (std::size_t i = 0; i < grid_->volume; ++i) {
      acc.u[i] += wk * member.u[i];
      acc.v[i] += wk * member.v[i];
    }
  }
  return acc;
}

double Stepper::quad_form(const WaveState& s, const GridWeight* cutoff, bool metric_weighted,
                          bool discrete_correction) const {
  const Grid& g = *grid_;
  const double inv_h2 = 1.0 / (g.h * g.h);
  const double voln = std::pow(g.h, g.dim);
  const int p = phase(s.step_index);
  const Coeffs& c = coeffs_[p];
  const double* ap = (metric_weighted && !c.unit) ? c.a->data() : nullptr;
  const double* up = s.u.data();
  const double* vp = s.v.data();
  const double* wp = cutoff ? cutoff->data() : nullptr;
  const int nx = g.cells[0];
  const std::ptrdiff_t strides[3] = {1, g.stride[1], g.stride[2]};
  LineWalk lw{&g, static_cast<std::size_t>(g.cells[1]) * g.cells[2]};

  std::vector<double> partial(chunks_.size(), 0.0);
  parallel_for(chunks_.size(), [&](std::size_t ci) {
    auto [lo, hi] = chunks_[ci];
    double acc = 0.0;
    for (std::size_t line = lo; line < hi; ++line) {
      std::size_t base = lw.base_of(line);
      // v term and left faces per axis; the i = nx face closes each line and
      // the j/k boundary faces are picked up by the ghost-side difference of
      // the first logical line (ghost u = 0, ghost weight = 0).
      for (int i = 0; i < nx; ++i) {
        std::size_t idx = base + i;
        double w2 = wp ? wp[idx] * wp[idx] : 1.0;
        acc += w2 * vp[idx] * vp[idx];
        for (int d = 0; d < g.dim; ++d) {
          std::size_t nb = idx - strides[d];
          double du = up[idx] - up[nb];
          double wf = wp ? 0.5 * (wp[idx] * wp[idx] + wp[nb] * wp[nb]) : 1.0;
          double af = ap ? 0.5 * (ap[idx] + ap[nb]) : 1.0;
          acc += wf * af * du * du * inv_h2;
        }
      }
      // closing faces at the high end of each axis within this line/row
      {
        std::size_t idx = base + nx;  // right ghost of the x line
        std::size_t nb = idx - 1;
        double du = up[idx] - up[nb];
        double wf = wp ? 0.5 * (wp[nb] * wp[nb]) : 1.0;
        double af = ap ? 0.5 * (ap[idx] + ap[nb]) : 1.0;
        acc += wf * af * du * du * inv_h2;
      }
      int jj = static_cast<int>(line % g.cells[1]);
      int kk = static_cast<int>(line / g.cells[1]);
      if (g.dim >= 2 && jj == g.cells[1] - 1) {
        for (int i = 0; i < nx; ++i) {
          std::size_t nb = base + i;
          std::size_t idx = nb + strides[1];
          double du = up[idx] - up[nb];
          double wf = wp ? 0.5 * (wp[nb] * wp[nb]) : 1.0;
          double af = ap ? 0.5 * (ap[idx] + ap[nb]) : 1.0;
          acc += wf * af * du * du * inv_h2;
        }
      }
      if (g.dim >= 3 && kk == g.cells[2] - 1) {
        for (int i = 0; i < nx; ++i) {
          std::size_t nb = base + i;
          std::size_t idx = nb + strides[2];
          double du = up[idx] - up[nb];
          double wf = wp ? 0.5 * (wp[nb] * wp[nb]) : 1.0;
          double af = ap ? 0.5 * (ap[idx] + ap[nb]) : 1.0;
          acc += wf * af * du * du * inv_h2;
        }
      }
      if (discrete_correction) {
        const double cdt = plan_.dt * plan_.dt / 4.0;
        const double* aa = c.unit ? nullptr : c.a->data();
        for (int i = 0; i < nx; ++i) {
          std::size_t idx = base + i;
          double lap;
          if (!aa) {
            lap = up[idx - 1] + up[idx + 1] - 2.0 * up[idx];
            if (g.dim >= 2) lap += up[idx - strides[1]] + up[idx + strides[1]] - 2.0 * up[idx];
            if (g.dim >= 3) lap += up[idx - strides[2]] + up[idx + strides[2]] - 2.0 * up[idx];
          } else {
            const double ai = aa[idx];
            lap = 0.0;
            for (int d = 0; d < g.dim; ++d) {
              lap += 0.5 * (ai + aa[idx - strides[d]]) * (up[idx - strides[d]] - up[idx]) +
                     0.5 * (ai + aa[idx + strides[d]]) * (up[idx + strides[d]] - up[idx]);
            }
          }
          lap *= inv_h2;
          double w2 = wp ? wp[idx] * wp[idx] : 1.0;
          acc -= cdt * w2 * lap * lap;
        }
      }
    }
    partial[ci] = acc;
  });
  double total = 0.0;
  for (double x : partial) total += x;
  return total * voln;
}

EnergyReading Stepper::energy(const WaveState& s, const GridWeight* cutoff,
                              EnergyVariant variant) const {
  EnergyReading r;
  r.variant = variant;
  r.region = cutoff ? "cutoff" : "grid";
  switch (variant) {
    case EnergyVariant::paper:
      r.value = quad_form(s, cutoff, false, false);
      break;
    case EnergyVariant::metric:
      r.value = quad_form(s, cutoff, true, false);
      break;
    case EnergyVariant::metric_discrete:
      r.value = quad_form(s, cutoff, true, true);
      break;
  }
  if (!std::isfinite(r.value)) throw NumericalError("non-finite energy");
  return r;
}

double Stepper::paper_norm(const WaveState& s) const {
  return std::sqrt(energy(s, nullptr, EnergyVariant::paper).value);
}

WaveState Stepper::random_state(std::mt19937_64& rng, const GridWeight* shape,
                                std::int64_t index) const {
  const Grid& g = *grid_;
  WaveState s = make_state(index);
  const auto* m = mask(phase(index));
  for (int k = 0; k < g.cells[2]; ++k)
    for (int j = 0; j < g.cells[1]; ++j)
      for (int i = 0; i < g.cells[0]; ++i) {
        std::size_t idx = g.index(i, j, k);
        double ru = uniform(rng, -1.0, 1.0);
        double rv = uniform(rng, -1.0, 1.0);
        if (m && (*m)[idx]) continue;
        double w = shape ? (*shape)[idx] : 1.0;
        s.u[idx] = w * ru;
        s.v[idx] = w * rv;
      }
  double nrm = paper_norm(s);
  if (nrm <= 0.0) throw NumericalError("random state has zero energy");
  for (std::size_t i = 0; i < g.volume; ++i) {
    s.u[i] /= nrm;
    s.v[i] /= nrm;
  }
  return s;
}

void Stepper::apply_weight(WaveState& s, const GridWeight& w) const {
  for (std::size_t i = 0; i < grid_->volume; ++i) {
    s.u[i] *= w[i];
    s.v[i] *= w[i];
  }
}

void Stepper::to_vector(const WaveState& s, double* out) const {
  const Grid& g = *grid_;
  std::size_t n = 0;
  for (int k = 0; k < g.cells[2]; ++k)
    for (int j = 0; j < g.cells[1]; ++j)
      for (int i = 0; i < g.cells[0]; ++i) out[n++] = s.u[g.index(i, j, k)];
  for (int k = 0; k < g.cells[2]; ++k)
    for (int j = 0; j < g.cells[1]; ++j)
      for (int i = 0; i < g.cells[0]; ++i) out[n++] = s.v[g.index(i, j, k)];
}

WaveState Stepper::from_vector(const double* in, std::int64_t index) const {
  const Grid& g = *grid_;
  WaveState s = make_state(index);
  const auto* m = mask(phase(index));
  std::size_t n = 0;
  for (int k = 0; k < g.cells[2]; ++k)
    for (int j = 0; j < g.cells[1]; ++j)
      for (int i = 0; i < g.cells[0]; ++i) {
        std::size_t idx = g.index(i, j, k);
        s.u[idx] = (m && (*m)[idx]) ? 0.0 : in[n];
        ++n;
      }
  for (int k = 0; k < g.cells[2]; ++k)
    for (int j = 0; j < g.cells[1]; ++j)
      for (int i = 0; i < g.cells[0]; ++i) {
        std::size_t idx = g.index(i, j, k);
        s.v[idx] = (m && (*m)[idx]) ? 0.0 : in[n];
        ++n;
      }
  return s;
}

NormEstimate operator_norm_estimate(const Stepper& st, std::int64_t s_index,
                                    std::int64_t t_index, int trials, std::uint64_t seed) {
  if (t_index < s_index) throw ParameterError("operator_norm_estimate: t must be >= s");
  NormEstimate est;
  std::int64_t span = t_index - s_index;
  if (span == 0) {
    est.samples.emplace_back(0.0, 1.0);
    return est;
  }
  std::int64_t stride = std::max<std::int64_t>(1, span / 16);
  std::vector<std::int64_t> marks;
  for (std::int64_t k = s_index; k <= t_index; k += stride) marks.push_back(k);
  if (marks.back() != t_index) marks.push_back(t_index);

  std::mt19937_64 rng(seed);
  std::vector<double> best(marks.size(), 0.0);
  for (int trial = 0; trial < std::max(1, trials); ++trial) {
    WaveState f = st.random_state(rng, nullptr, s_index);
    double n0 = st.paper_norm(f);
    std::size_t mi = 0;
    WaveState cur = f;
    for (std::int64_t k = s_index; k <= t_index; ++k) {
      if (mi < marks.size() && marks[mi] == k) {
        best[mi] = std::max(best[mi], st.paper_norm(cur) / n0);
        ++mi;
      }
      if (k < t_index) st.step_inplace(cur);
    }
  }
  // Least-squares slope of ln(est) vs elapsed time, clamped nonnegative; B
  // lifted so the bound holds on every sample.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < marks.size(); ++i) {
    double tau = (marks[i] - s_index) * st.dt();
    double y = std::log(std::max(best[i], 1e-300));
    sx += tau;
    sy += y;
    sxx += tau * tau;
    sxy += tau * y;
    ++n;
    est.samples.emplace_back(tau, best[i]);
  }
  double denom = n * sxx - sx * sx;
  double slope = denom > 0 ? (n * sxy - sx * sy) / denom : 0.0;
  est.A = std::max(0.0, slope);
  double lnB = -1e300;
  for (auto& [tau, e] : est.samples) lnB = std::max(lnB, std::log(std::max(e, 1e-300)) - est.A * tau);
  est.B = std::exp(lnB);
  est.value = est.samples.back().second;
  return est;
}

}  // namespace wavelab
