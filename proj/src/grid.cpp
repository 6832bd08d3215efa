#include "wavelab/grid.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace wavelab {

Grid make_grid(int dim, double half_width, int cells_per_axis) {
  if (dim < 1 || dim > 3) throw ParameterError("grid dimension must be 1, 2 or 3");
  if (cells_per_axis < 4) throw ParameterError("grid needs at least 4 cells per axis");
  if (half_width <= 0.0) throw ParameterError("grid half width must be positive");
  Grid g;
  g.dim = dim;
  g.half_width = half_width;
  g.h = 2.0 * half_width / cells_per_axis;
  for (int d = 0; d < 3; ++d) {
    g.cells[d] = d < dim ? cells_per_axis : 1;
    g.padded[d] = d < dim ? cells_per_axis + 2 : 1;
  }
  g.stride[0] = 1;
  g.stride[1] = g.padded[0];
  g.stride[2] = static_cast<std::ptrdiff_t>(g.padded[0]) * g.padded[1];
  g.volume = static_cast<std::size_t>(g.padded[0]) * g.padded[1] * g.padded[2];
  g.cell_count = static_cast<std::size_t>(g.cells[0]) * g.cells[1] * g.cells[2];
  return g;
}

StepPlan make_plan(const Grid& g, const Scenario& s, double cfl, BoundaryMode boundary,
                   int steps_per_period_override) {
  if (cfl <= 0.0 || cfl > 1.0)
    throw ParameterError("CFL number must lie in (0, 1]");
  StepPlan p;
  p.cfl = cfl;
  p.boundary = boundary;
  const double T = s.period();
  const double cmax = std::sqrt(g.dim * s.metric.upper_bound);
  if (steps_per_period_override > 0) {
    p.steps_per_period = steps_per_period_override;
  } else {
    p.steps_per_period = std::max(1, static_cast<int>(std::ceil(T * cmax / (cfl * g.h))));
  }
  p.dt = T / p.steps_per_period;
  if (p.dt * cmax > cfl * g.h * (1.0 + 1e-12))
    throw ParameterError("requested steps_per_period violates the CFL bound");
  return p;
}

GridWeight radial_cutoff(const Grid& g, double plateau, double support) {
  if (!(support > plateau) || plateau < 0.0)
    throw ParameterError("radial_cutoff needs 0 <= plateau < support");
  GridWeight w(g.volume, 0.0);
  for (int k = 0; k < g.cells[2]; ++k)
    for (int j = 0; j < g.cells[1]; ++j)
      for (int i = 0; i < g.cells[0]; ++i) {
        double r = norm(g.center(i, j, k));
        w[g.index(i, j, k)] = smooth_step_down((r - plateau) / (support - plateau));
      }
  return w;
}

namespace {

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void get(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void save_snapshot(const std::string& path, const WaveState& s, double dt) {
  static_assert(std::endian::native == std::endian::little,
                "snapshot format assumes a little-endian host");
  const Grid& g = *s.grid;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot open snapshot for writing: " + path);
  out.write("FWLB", 4);
  put<std::uint32_t>(out, 1u);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim));
  for (int d = 0; d < 3; ++d) put<std::uint32_t>(out, static_cast<std::uint32_t>(g.cells[d]));
  put<double>(out, g.h);
  put<double>(out, g.half_width);
  put<double>(out, dt);
  put<double>(out, s.time);
  put<std::int64_t>(out, s.step_index);
  put<std::int64_t>(out, s.mask_id);
  for (const auto* f : {&s.u, &s.v})
    for (int k = 0; k < g.cells[2]; ++k)
      for (int j = 0; j < g.cells[1]; ++j)
        for (int i = 0; i < g.cells[0]; ++i) put<double>(out, (*f)[g.index(i, j, k)]);
  if (!out) throw NumericalError("short write on snapshot: " + path);
}

WaveState load_snapshot(const std::string& path, double* dt_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open snapshot: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "FWLB", 4) != 0)
    throw ParameterError("not a FWLB snapshot: " + path);
  std::uint32_t version = 0, dim = 0, cells[3];
  get(in, version);
  if (version != 1) throw ParameterError("unsupported snapshot version");
  get(in, dim);
  for (auto& c : cells) get(in, c);
  double h = 0, half_width = 0, dt = 0, time = 0;
  get(in, h);
  get(in, half_width);
  get(in, dt);
  get(in, time);
  std::int64_t index = 0, mask_id = 0;
  get(in, index);
  get(in, mask_id);
  for (int d = 1; d < static_cast<int>(dim); ++d)
    if (cells[d] != cells[0]) throw ParameterError("snapshot grid is not cubic");
  auto grid = std::make_shared<Grid>(make_grid(static_cast<int>(dim), half_width,
                                               static_cast<int>(cells[0])));
  WaveState s;
  s.grid = grid;
  s.u.assign(grid->volume, 0.0);
  s.v.assign(grid->volume, 0.0);
  s.step_index = index;
  s.time = time;
  s.mask_id = mask_id;
  for (auto* f : {&s.u, &s.v})
    for (int k = 0; k < grid->cells[2]; ++k)
      for (int j = 0; j < grid->cells[1]; ++j)
        for (int i = 0; i < grid->cells[0]; ++i) get<double>(in, (*f)[grid->index(i, j, k)]);
  if (!in) throw ParameterError("truncated snapshot: " + path);
  if (dt_out) *dt_out = dt;
  return s;
}

}  // namespace wavelab
