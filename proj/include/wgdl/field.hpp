#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "wgdl/grid.hpp"

namespace wgdl {

using cplx = std::complex<double>;

// Physical-space complex samples over a grid.
class ComplexField {
 public:
  ComplexField() = default;
  explicit ComplexField(std::shared_ptr<const Grid> grid)
      : grid_(std::move(grid)), v_(grid_->total) {}

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  cplx* data() { return v_.data(); }
  const cplx* data() const { return v_.data(); }
  cplx& operator[](std::size_t i) { return v_[i]; }
  const cplx& operator[](std::size_t i) const { return v_[i]; }
  bool all_finite() const;

 private:
  std::shared_ptr<const Grid> grid_;
  std::vector<cplx> v_;
};

// Fourier coefficients c_k in FFT ordering, normalized so that
// u(z) = sum_k c_k e^{i k.(z - corner)} and  ||u||_{L^2}^2 = V * sum |c_k|^2.
struct SpectralField {
  std::shared_ptr<const Grid> grid;
  std::vector<cplx> c;
};

// Unnormalized transforms on raw buffers (out-of-place; in != out).
void fft_nd_raw(const std::vector<int>& dims, const cplx* in, cplx* out,
                bool forward);
void fft_forward_raw(const Grid& g, const cplx* in, cplx* out);
void fft_backward_raw(const Grid& g, const cplx* in, cplx* out);
// Torus-axes-only unnormalized forward/backward transform of every fiber.
void fiber_forward_raw(const Grid& g, const cplx* in, cplx* out);
void fiber_backward_raw(const Grid& g, const cplx* in, cplx* out);

SpectralField to_spectral(const ComplexField& f);
ComplexField to_physical(const SpectralField& F);

// (i k_axis)^order multiplier in place.
void apply_axis_derivative(SpectralField& F, int axis, int order);
ComplexField derivative(const ComplexField& f, int axis, int order);

// Norms. q may be +infinity (max modulus); quadrature is the plain Riemann
// sum with the grid cell volume.
double lq_norm(const ComplexField& f, double q);
double sobolev_norm(const ComplexField& f, double s);
double sobolev_norm(const SpectralField& F, double s);

// Per-Euclidean-node H^gamma norm of the torus fiber (size euclid_count).
std::vector<double> mixed_sobolev_torus(const ComplexField& f, double gamma);

struct GaussianSpec {
  double amplitude = 1.0;
  double width = 1.0;                // envelope e^{-(x-c)^2 / (2 width^2)}
  std::vector<double> center;        // Euclidean center, defaults to 0
  std::vector<int> modulation;       // integer mode index per axis (d+n)
};

struct MakeFieldResult {
  ComplexField field;
  bool resolution_warning = false;   // box-edge tail above 1e-10 of peak
  double tail_ratio = 0.0;
};

MakeFieldResult make_gaussian(const std::shared_ptr<const Grid>& grid,
                              const GaussianSpec& spec);

// Plane wave amp * e^{i k.z}; k must sit on the grid's wavenumber lattice.
ComplexField make_plane_wave(const std::shared_ptr<const Grid>& grid,
                             const std::vector<double>& k, cplx amp = 1.0);
ComplexField make_plane_wave_modes(const std::shared_ptr<const Grid>& grid,
                                   const std::vector<int>& modes,
                                   cplx amp = 1.0);

// Random field with spectrum ~ <k>^{-decay}, generated in a fixed mode order
// from the seed (never parallelized).
ComplexField random_smooth_field(const std::shared_ptr<const Grid>& grid,
                                 std::uint64_t seed, double decay = 3.0,
                                 double amplitude = 1.0);

ComplexField cyclic_translate(const ComplexField& f,
                              const std::vector<int>& shift);

/// Binary checkpoints: magic "WGDL1\0", LE u32 d, n, per-axis counts,
// f64 L, torus_period, then interleaved f64 (re, im) in row-major order.
void save_checkpoint(const std::string& path, const ComplexField& f);
ComplexField load_checkpoint(const std::string& path);

}  // namespace wgdl
