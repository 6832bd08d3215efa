#pragma once

#include <functional>
#include <vector>

#include "wavelab/common.hpp"

namespace wavelab {

// 3D radially symmetric free wave (a == 1) reduced to w = r*u on a 1D mesh:
// w_tt = w_rr with w(0) = 0 (regularity) and w(extent) = 0. High-accuracy
// oracle for the odd-dimension Huygens and local-decay checks.
class RadialWave {
 public:
  struct State {
    std::vector<double> w, wdot;  // nodes r_j = j*h, j = 0..cells
    std::int64_t step_index = 0;
    double time = 0.0;
  };

  RadialWave(int cells, double extent, double cfl = 0.9);

  double h() const { return h_; }
  double dt() const { return dt_; }
  double extent() const { return extent_; }

  State from_u_profile(const std::function<double(double)>& u0,
                       const std::function<double(double)>& v0) const;
  void step_inplace(State& s) const;
  State evolve_to(const State& s, double t_target) const;

  // 4*pi * integral_0^radius (u_r^2 + u_t^2) r^2 dr with u = w/r.
  double local_energy(const State& s, double radius) const;
  double total_energy(const State& s) const { return local_energy(s, extent_); }

  // One-period map on the (w, wdot) interior nodes; used to drive the
  // operator-sequence checks through the radial oracle.
  std::size_t vector_dim() const { return 2 * static_cast<std::size_t>(cells_ - 1); }
  void to_vector(const State& s, double* out) const;
  State from_vector(const double* in) const;

 private:
  int cells_;
  double extent_, h_, dt_;
};

}  // namespace wavelab
