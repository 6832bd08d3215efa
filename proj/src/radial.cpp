#include "wavelab/radial.hpp"

#include <cmath>

namespace wavelab {

RadialWave::RadialWave(int cells, double extent, double cfl) : cells_(cells), extent_(extent) {
  if (cells < 8) throw ParameterError("radial mesh needs at least 8 cells");
  if (extent <= 0.0) throw ParameterError("radial extent must be positive");
  if (cfl <= 0.0 || cfl > 1.0) throw ParameterError("CFL number must lie in (0,1]");
  h_ = extent / cells;
  dt_ = cfl * h_;
}

RadialWave::State RadialWave::from_u_profile(const std::function<double(double)>& u0,
                                             const std::function<double(double)>& v0) const {
  State s;
  s.w.assign(cells_ + 1, 0.0);
  s.wdot.assign(cells_ + 1, 0.0);
  for (int j = 1; j < cells_; ++j) {
    double r = j * h_;
    if (u0) s.w[j] = r * u0(r);
    if (v0) s.wdot[j] = r * v0(r);
  }
  return s;
}

void RadialWave::step_inplace(State& s) const {
  const double c = 0.5 * dt_ / (h_ * h_);
  auto kick = [&](std::vector<double>& wd, const std::vector<double>& w) {
    for (int j = 1; j < cells_; ++j) wd[j] += c * (w[j - 1] - 2.0 * w[j] + w[j + 1]);
  };
  kick(s.wdot, s.w);
  for (int j = 1; j < cells_; ++j) s.w[j] += dt_ * s.wdot[j];
  kick(s.wdot, s.w);
  ++s.step_index;
  s.time = s.step_index * dt_;
}

RadialWave::State RadialWave::evolve_to(const State& s, double t_target) const {
  double k = t_target / dt_;
  auto target = static_cast<std::int64_t>(std::llround(k));
  if (std::abs(k - target) > 1e-9 * std::max(1.0, std::abs(k)))
    throw ParameterError("target time is not on the radial step lattice");
  State out = s;
  while (out.step_index < target) step_inplace(out);
  return out;
}

double RadialWave::local_energy(const State& s, double radius) const {
  // Face-centered quadrature for (u_r)^2 with u = w/r, node quadrature for
  // (u_t)^2 = (wdot/r)^2 * r^2 = wdot^2.
  double acc = 0.0;
  int jmax = std::min(cells_, static_cast<int>(std::floor(radius / h_)));
  for (int j = 0; j < jmax; ++j) {
    double rf = (j + 0.5) * h_;
    double wr = (s.w[j + 1] - s.w[j]) / h_;
    double wof = 0.5 * (s.w[j] + s.w[j + 1]) / rf;
    double ur = (wr - wof) / rf;  // u_r = (w_r - w/r)/r
    acc += ur * ur * rf * rf * h_;
  }
  for (int j = 1; j <= jmax; ++j) {
    double wt = s.wdot[j];
    acc += wt * wt * (j == jmax ? 0.5 : 1.0) * h_;
  }
  return 4.0 * M_PI * acc;
}

void RadialWave::to_vector(const State& s, double* out) const {
  std::size_t n = 0;
  for (int j = 1; j < cells_; ++j) out[n++] = s.w[j];
  for (int j = 1; j < cells_; ++j) out[n++] = s.wdot[j];
}

RadialWave::State RadialWave::from_vector(const double* in) const {
  State s;
  s.w.assign(cells_ + 1, 0.0);
  s.wdot.assign(cells_ + 1, 0.0);
  std::size_t n = 0;
  for (int j = 1; j < cells_; ++j) s.w[j] = in[n++];
  for (int j = 1; j < cells_; ++j) s.wdot[j] = in[n++];
  return s;
}

}  // namespace wavelab
