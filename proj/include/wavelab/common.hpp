#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavelab {

// Spatial point; axes beyond the active dimension are zero.
using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 scale(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
inline Vec3 add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

// Error taxonomy mapped to CLI exit codes: input/parameter problems -> 2,
// failed checks -> 1, numerical breakdown -> 3.
struct ParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// C-inf bump: 1 at s=0, identically 0 for |s| >= 1.
inline double bump(double s) {
  double q = s * s;
  if (q >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - q));
}
// d bump/ds
inline double bump_ds(double s) {
  double q = s * s;
  if (q >= 1.0) return 0.0;
  double r = 1.0 - q;
  return bump(s) * (-2.0 * s / (r * r));
}

// C-inf window on [0,1]: vanishes to all orders at both ends, peak 1 at 1/2.
inline double splice_window(double q) {
  if (q <= 0.0 || q >= 1.0) return 0.0;
  return std::exp(4.0 - 1.0 / (q * (1.0 - q)));
}
inline double splice_window_dq(double q) {
  if (q <= 0.0 || q >= 1.0) return 0.0;
  double p = q * (1.0 - q);
  return splice_window(q) * (1.0 - 2.0 * q) / (p * p);
}

// Smooth step: 1 for s<=0, 0 for s>=1, C-inf in between.
inline double smooth_step_down(double s) {
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  double a = std::exp(-1.0 / s);
  double b = std::exp(-1.0 / (1.0 - s));
  return b / (a + b);
}

// Deterministic uniforms from a seeded engine (no distribution-library
// dependence in outputs).
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
inline double uniform(std::mt19937_64& rng, double a, double b) {
  return a + (b - a) * uniform01(rng);
}

// FNV-1a, used for config hashes and output checksums.
std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed = 0xcbf29ce484222325ull);
std::string hex64(std::uint64_t v);

// Shortest-round-trip float formatting (17 significant digits) for CSV.
std::string fmt_g17(double v);

// Runs fn(chunk) for chunk in [0, chunks). Work is distributed over an
// internal persistent pool; results must not depend on the assignment
// (callers keep determinism by indexing partials with chunk).
void parallel_for(std::size_t chunks, const std::function<void(std::size_t)>& fn);
void set_thread_count(int n);  // 0 = hardware default
int thread_count();

}  // namespace wavelab
