#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "wavelab/geometry.hpp"

namespace wavelab {

// Cell-centered box grid on [-L, L]^dim with one ghost layer per used axis.
// Ghost cells hold permanent zeros, which realizes the Dirichlet outer wall
// and lets the stencil run branch-free.
struct Grid {
  int dim = 3;
  double h = 0.25;
  double half_width = 4.0;           // L
  std::array<int, 3> cells{1, 1, 1};
  std::array<int, 3> padded{1, 1, 1};
  std::array<std::ptrdiff_t, 3> stride{0, 0, 0};
  std::size_t volume = 0;       // padded array length
  std::size_t cell_count = 0;   // product of logical cells

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>((i + (dim >= 1 ? 1 : 0)) * stride[0] +
                                    (j + (dim >= 2 ? 1 : 0)) * stride[1] +
                                    (k + (dim >= 3 ? 1 : 0)) * stride[2]);
  }
  Vec3 center(int i, int j, int k) const {
    Vec3 x{0, 0, 0};
    x[0] = -half_width + (i + 0.5) * h;
    if (dim >= 2) x[1] = -half_width + (j + 0.5) * h;
    if (dim >= 3) x[2] = -half_width + (k + 0.5) * h;
    return x;
  }
};

Grid make_grid(int dim, double half_width, int cells_per_axis);

enum class BoundaryMode { reflecting, sponge };

struct StepPlan {
  double dt = 0.0;
  int steps_per_period = 0;   // N_T; dt = T / N_T
  double cfl = 0.9;
  BoundaryMode boundary = BoundaryMode::reflecting;
  int sponge_width = 12;      // cells
  double sponge_strength = 2.0;
};

// Picks dt = T/N_T with the smallest N_T satisfying dt*sqrt(dim*C) <= cfl*h.
// steps_per_period_override forces N_T (still CFL-checked downstream).
StepPlan make_plan(const Grid& g, const Scenario& s, double cfl = 0.9,
                   BoundaryMode boundary = BoundaryMode::reflecting,
                   int steps_per_period_override = 0);

// Masked samples of (u, u_t) on a grid at a lattice time. Fields are padded
// arrays (see Grid); masked and ghost entries are zero.
struct WaveState {
  std::shared_ptr<const Grid> grid;
  std::vector<double> u, v;
  std::int64_t step_index = 0;
  double time = 0.0;
  std::int64_t mask_id = 0;  // schedule phase the state was masked with
};

// Grid weight (cutoff chi/psi): padded array with values in [0,1].
using GridWeight = std::vector<double>;

// Radial plateau-taper cutoff: exactly 1 for |x| <= plateau, exactly 0 for
// |x| >= support, C-inf in between.
GridWeight radial_cutoff(const Grid& g, double plateau, double support);

// Snapshot file ("FWLB"): header + raw little-endian doubles, u then v.
void save_snapshot(const std::string& path, const WaveState& s, double dt);
WaveState load_snapshot(const std::string& path, double* dt_out = nullptr);

}  // namespace wavelab
