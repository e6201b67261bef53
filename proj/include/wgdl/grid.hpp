#pragma once

#include <memory>
#include <vector>

#include "wgdl/common.hpp"

namespace wgdl {

// Geometry of the truncated waveguide: a periodic Euclidean box [-L, L)^d
// crossed with an n-torus of configurable period. Row-major layout with the
// Euclidean axes first, so torus reductions are contiguous.
struct GridSpec {
  int euclid_dims = 1;            // d >= 0 (d = 0 allowed for fiber-only work)
  int torus_dims = 0;             // n >= 0
  int points_euclid = 0;          // per Euclidean axis
  int points_torus = 0;           // per torus axis
  double box_half_length = 0.0;   // L
  double torus_period = 2.0 * kPi;
};

// Per-axis wavenumbers in FFT ordering plus the precomputed |k|^2 / |k|^4
// dispersion symbol arrays over the full grid.
//
// axis_d1 mirrors axis but zeroes the unpaired k = -N/2 entry on even-sized
// axes. Odd-order derivative multipliers must use it: the Nyquist mode has no
// conjugate partner, so keeping it would make first derivatives non-skew and
// give real fields spurious imaginary derivative components.
struct WaveNumberTable {
  std::vector<std::vector<double>> axis;     // [d+n][axis length]
  std::vector<std::vector<double>> axis_d1;  // axis, Nyquist entry zeroed
  std::vector<double> k2;                    // |k|^2, all axes, FFT order
  std::vector<double> k4;                    // |k|^4 = (|k|^2)^2
};

class Grid {
 public:
  explicit Grid(const GridSpec& spec);

  GridSpec spec;
  int d = 0, n = 0, axes = 0;
  std::vector<int> dims;              // size axes, Euclidean first
  std::vector<std::size_t> strides;   // row-major
  std::size_t total = 0;              // product of dims
  std::size_t euclid_count = 1;       // product of Euclidean dims
  std::size_t torus_count = 1;        // product of torus dims
  double dx = 0.0;                    // Euclidean spacing 2L/points_euclid
  double dalpha = 0.0;                // torus spacing period/points_torus
  double cell_volume = 0.0;
  double volume = 0.0;                // (2L)^d * period^n
  WaveNumberTable table;

  // Physical coordinate of sample `index` along `axis`: Euclidean axes span
  // [-L, L), torus axes [0, period).
  double coord(int axis, int index) const;

  // Signed FFT mode index (0..N/2-1, -N/2..-1) for position `index`.
  int mode_index(int axis, int index) const;

  void unflatten(std::size_t flat, int* idx) const;  // idx has `axes` entries
  std::size_t flatten(const int* idx) const;

  // |k|^2 restricted to the Euclidean axes (group-velocity and rate-identity
  // work never wraps torus modes into the box). Size = total.
  const std::vector<double>& k2_euclid() const { return k2_euclid_; }

 private:
  std::vector<double> k2_euclid_;
};

std::shared_ptr<const Grid> make_grid(const GridSpec& spec);

// order 2 -> |k|^2, order 4 -> |k|^4; anything else is rejected.
const std::vector<double>& dispersion_symbol(const WaveNumberTable& table,
                                             int order);

}  // namespace wgdl
