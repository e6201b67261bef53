#include "wgdl/field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <random>

#include "wgdl/threading.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace wgdl {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is. Plans
// are created once per shape with FFTW_ESTIMATE (deterministic algorithm
// choice) | FFTW_UNALIGNED (safe for std::vector storage) and cached.
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::mutex g_plan_mutex;

PlanPair& nd_plans(const std::vector<int>& dims) {
  static std::map<std::vector<int>, PlanPair> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = cache.find(dims);
  if (it != cache.end()) return it->second;
  std::size_t total = 1;
  for (int c : dims) total *= static_cast<std::size_t>(c);
  std::vector<cplx> a(total), b(total);
  auto* in = reinterpret_cast<fftw_complex*>(a.data());
  auto* out = reinterpret_cast<fftw_complex*>(b.data());
  PlanPair p;
  p.fwd = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), in, out,
                        FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), in, out,
                        FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  return cache.emplace(dims, p).first->second;
}

PlanPair& full_plans(const Grid& g) { return nd_plans(g.dims); }

PlanPair& fiber_plans(const Grid& g) {
  static std::map<std::vector<int>, PlanPair> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = cache.find(g.dims);
  if (it != cache.end()) return it->second;
  std::vector<cplx> a(g.total), b(g.total);
  auto* in = reinterpret_cast<fftw_complex*>(a.data());
  auto* out = reinterpret_cast<fftw_complex*>(b.data());
  const int rank = g.n;
  const int* dims = g.dims.data() + g.d;
  const int howmany = static_cast<int>(g.euclid_count);
  const int dist = static_cast<int>(g.torus_count);
  PlanPair p;
  p.fwd = fftw_plan_many_dft(rank, dims, howmany, in, nullptr, 1, dist, out,
                             nullptr, 1, dist, FFTW_FORWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_many_dft(rank, dims, howmany, in, nullptr, 1, dist, out,
                             nullptr, 1, dist, FFTW_BACKWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
  return cache.emplace(g.dims, p).first->second;
}

void execute(fftw_plan plan, const cplx* in, cplx* out) {
  fftw_execute_dft(plan,
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

double axis_base(const Grid& g, int axis) {
  return axis < g.d ? kPi / g.spec.box_half_length
                    : 2.0 * kPi / g.spec.torus_period;
}

}  // namespace

bool ComplexField::all_finite() const {
  for (const cplx& z : v_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

void fft_nd_raw(const std::vector<int>& dims, const cplx* in, cplx* out,
                bool forward) {
  if (dims.empty()) fail(ErrorKind::validation, "fft_nd_raw: empty shape");
  for (int c : dims)
    if (c < 1) fail(ErrorKind::validation, "fft_nd_raw: bad axis count");
  PlanPair& p = nd_plans(dims);
  execute(forward ? p.fwd : p.bwd, in, out);
}

void fft_forward_raw(const Grid& g, const cplx* in, cplx* out) {
  execute(full_plans(g).fwd, in, out);
}

void fft_backward_raw(const Grid& g, const cplx* in, cplx* out) {
  execute(full_plans(g).bwd, in, out);
}

void fiber_forward_raw(const Grid& g, const cplx* in, cplx* out) {
  if (g.n == 0) fail(ErrorKind::validation, "fiber transform requires n >= 1");
  execute(fiber_plans(g).fwd, in, out);
}

void fiber_backward_raw(const Grid& g, const cplx* in, cplx* out) {
  if (g.n == 0) fail(ErrorKind::validation, "fiber transform requires n >= 1");
  execute(fiber_plans(g).bwd, in, out);
}

SpectralField to_spectral(const ComplexField& f) {
  SpectralField F;
  F.grid = f.grid_ptr();
  F.c.resize(f.size());
  fft_forward_raw(f.grid(), f.data(), F.c.data());
  const double scale = 1.0 / static_cast<double>(f.size());
  cplx* c = F.c.data();
  par_for(f.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) c[i] *= scale;
  });
  return F;
}

ComplexField to_physical(const SpectralField& F) {
  ComplexField f(F.grid);
  fft_backward_raw(*F.grid, F.c.data(), f.data());
  return f;
}

void apply_axis_derivative(SpectralField& F, int axis, int order) {
  const Grid& g = *F.grid;
  if (axis < 0 || axis >= g.axes)
    fail(ErrorKind::validation, "derivative: axis out of range");
  if (order < 1) fail(ErrorKind::validation, "derivative: order must be >= 1");
  // Odd orders need the skew-adjoint wavenumbers (Nyquist zeroed); even-order
  // multipliers are real and even, so the full table is safe there.
  const auto& kax = (order % 2 != 0)
                        ? g.table.axis_d1[static_cast<std::size_t>(axis)]
                        : g.table.axis[static_cast<std::size_t>(axis)];
  const std::size_t stride = g.strides[static_cast<std::size_t>(axis)];
  const std::size_t count = static_cast<std::size_t>(g.dims[axis]);
  cplx* c = F.c.data();
  par_for(g.total, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const std::size_t ai = (i / stride) % count;
      cplx m(1.0, 0.0);
      const cplx ik(0.0, kax[ai]);
      for (int o = 0; o < order; ++o) m *= ik;
      c[i] *= m;
    }
  });
}

ComplexField derivative(const ComplexField& f, int axis, int order) {
  SpectralField F = to_spectral(f);
  apply_axis_derivative(F, axis, order);
  return to_physical(F);
}

double lq_norm(const ComplexField& f, double q) {
  if (!(q >= 1.0))
    fail(ErrorKind::validation, "lq_norm: q must be >= 1");
  const cplx* u = f.data();
  if (std::isinf(q)) {
    return par_max(f.size(), [&](std::size_t b, std::size_t e) {
      double m = 0.0;
      for (std::size_t i = b; i < e; ++i) m = std::max(m, std::abs(u[i]));
      return m;
    });
  }
  const double cell = f.grid().cell_volume;
  double s;
  if (q == 2.0) {
    s = par_sum(f.size(), [&](std::size_t b, std::size_t e) {
      double acc = 0.0;
      for (std::size_t i = b; i < e; ++i) acc += std::norm(u[i]);
      return acc;
    });
  } else {
    const double half_q = 0.5 * q;
    s = par_sum(f.size(), [&](std::size_t b, std::size_t e) {
      double acc = 0.0;
      for (std::size_t i = b; i < e; ++i) acc += std::pow(std::norm(u[i]), half_q);
      return acc;
    });
  }
  return std::pow(cell * s, 1.0 / q);
}

double sobolev_norm(const SpectralField& F, double s) {
  if (s < 0.0) fail(ErrorKind::validation, "sobolev_norm: s must be >= 0");
  const Grid& g = *F.grid;
  const double* k2 = g.table.k2.data();
  const cplx* c = F.c.data();
  double acc;
  if (s == 0.0) {
    acc = par_sum(g.total, [&](std::size_t b, std::size_t e) {
      double a = 0.0;
      for (std::size_t i = b; i < e; ++i) a += std::norm(c[i]);
      return a;
    });
  } else if (s == 2.0) {
    acc = par_sum(g.total, [&](std::size_t b, std::size_t e) {
      double a = 0.0;
      for (std::size_t i = b; i < e; ++i) {
        const double w = 1.0 + k2[i];
        a += w * w * std::norm(c[i]);
      }
      return a;
    });
  } else {
    acc = par_sum(g.total, [&](std::size_t b, std::size_t e) {
      double a = 0.0;
      for (std::size_t i = b; i < e; ++i)
        a += std::pow(1.0 + k2[i], s) * std::norm(c[i]);
      return a;
    });
  }
  return std::sqrt(g.volume * acc);
}

double sobolev_norm(const ComplexField& f, double s) {
  return sobolev_norm(to_spectral(f), s);
}

std::vector<double> mixed_sobolev_torus(const ComplexField& f, double gamma) {
  const Grid& g = f.grid();
  if (g.n == 0)
    fail(ErrorKind::validation, "mixed_sobolev_torus: requires n >= 1");
  if (gamma < 0.0)
    fail(ErrorKind::validation, "mixed_sobolev_torus: gamma must be >= 0");
  std::vector<cplx> hat(g.total);
  fiber_forward_raw(g, f.data(), hat.data());

  // <k_alpha>^{2 gamma} over one fiber (FFT order along torus axes).
  const std::size_t fiber = g.torus_count;
  std::vector<double> w(fiber);
  for (std::size_t j = 0; j < fiber; ++j) {
    double k2 = 0.0;
    for (int a = 0; a < g.n; ++a) {
      const std::size_t sub =
          g.strides[static_cast<std::size_t>(g.d + a)];  // within-fiber stride
      const int count = g.dims[static_cast<std::size_t>(g.d + a)];
      const int ai = static_cast<int>((j / sub) % static_cast<std::size_t>(count));
      const double k = g.table.axis[static_cast<std::size_t>(g.d + a)]
                                   [static_cast<std::size_t>(ai)];
      k2 += k * k;
    }
    w[j] = std::pow(1.0 + k2, gamma);
  }

  const double norm2 = 1.0 / static_cast<double>(fiber * fiber);
  double torus_volume = 1.0;
  for (int a = 0; a < g.n; ++a) torus_volume *= g.spec.torus_period;

  std::vector<double> out(g.euclid_count);
  par_for(g.euclid_count, [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      const cplx* c = hat.data() + node * fiber;
      double acc = 0.0;
      for (std::size_t j = 0; j < fiber; ++j) acc += w[j] * std::norm(c[j]);
      out[node] = std::sqrt(torus_volume * norm2 * acc);
    }
  });
  return out;
}

MakeFieldResult make_gaussian(const std::shared_ptr<const Grid>& grid,
                              const GaussianSpec& spec) {
  const Grid& g = *grid;
  if (spec.width <= 0.0)
    fail(ErrorKind::validation, "make_gaussian: width must be positive");
  std::vector<double> center(static_cast<std::size_t>(g.d), 0.0);
  if (!spec.center.empty()) {
    if (spec.center.size() != static_cast<std::size_t>(g.d))
      fail(ErrorKind::validation, "make_gaussian: center needs d entries");
    center = spec.center;
  }
  std::vector<int> mod(static_cast<std::size_t>(g.axes), 0);
  if (!spec.modulation.empty()) {
    if (spec.modulation.size() != static_cast<std::size_t>(g.axes))
      fail(ErrorKind::validation, "make_gaussian: modulation needs d+n entries");
    mod = spec.modulation;
  }

  // Worst box-edge tail of the envelope relative to the peak.
  double tail = 0.0;
  const double L = g.spec.box_half_length;
  for (int a = 0; a < g.d; ++a) {
    const double dist = L - std::abs(center[static_cast<std::size_t>(a)]);
    tail = std::max(tail, std::exp(-dist * dist / (2.0 * spec.width * spec.width)));
  }

  MakeFieldResult res;
  res.field = ComplexField(grid);
  res.tail_ratio = tail;
  res.resolution_warning = g.d > 0 && tail > 1e-10;

  cplx* u = res.field.data();
  const double inv2w2 = 1.0 / (2.0 * spec.width * spec.width);
  par_for(g.total, [&](std::size_t b, std::size_t e) {
    std::vector<int> id(static_cast<std::size_t>(g.axes));
    for (std::size_t i = b; i < e; ++i) {
      g.unflatten(i, id.data());
      double expo = 0.0, phase = 0.0;
      for (int a = 0; a < g.axes; ++a) {
        const double z = g.coord(a, id[static_cast<std::size_t>(a)]);
        if (a < g.d) {
          const double dz = z - center[static_cast<std::size_t>(a)];
          expo -= dz * dz * inv2w2;
        }
        phase += mod[static_cast<std::size_t>(a)] * axis_base(g, a) * z;
      }
      u[i] = spec.amplitude * std::exp(expo) * std::polar(1.0, phase);
    }
  });
  return res;
}

ComplexField make_plane_wave(const std::shared_ptr<const Grid>& grid,
                             const std::vector<double>& k, cplx amp) {
  const Grid& g = *grid;
  if (k.size() != static_cast<std::size_t>(g.axes))
    fail(ErrorKind::validation, "make_plane_wave: k needs d+n entries");
  std::vector<int> modes(static_cast<std::size_t>(g.axes));
  for (int a = 0; a < g.axes; ++a) {
    const double ratio = k[static_cast<std::size_t>(a)] / axis_base(g, a);
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-12 * std::max(1.0, std::abs(ratio)))
      fail(ErrorKind::validation,
           "make_plane_wave: wavevector component off the grid lattice");
    modes[static_cast<std::size_t>(a)] = static_cast<int>(rounded);
  }
  return make_plane_wave_modes(grid, modes, amp);
}

ComplexField make_plane_wave_modes(const std::shared_ptr<const Grid>& grid,
                                   const std::vector<int>& modes, cplx amp) {
  const Grid& g = *grid;
  if (modes.size() != static_cast<std::size_t>(g.axes))
    fail(ErrorKind::validation, "make_plane_wave: modes needs d+n entries");
  ComplexField f(grid);
  cplx* u = f.data();
  par_for(g.total, [&](std::size_t b, std::size_t e) {
    std::vector<int> id(static_cast<std::size_t>(g.axes));
    for (std::size_t i = b; i < e; ++i) {
      g.unflatten(i, id.data());
      double phase = 0.0;
      for (int a = 0; a < g.axes; ++a)
        phase += modes[static_cast<std::size_t>(a)] * axis_base(g, a) *
                 g.coord(a, id[static_cast<std::size_t>(a)]);
      u[i] = amp * std::polar(1.0, phase);
    }
  });
  return f;
}

ComplexField random_smooth_field(const std::shared_ptr<const Grid>& grid,
                                 std::uint64_t seed, double decay,
                                 double amplitude) {
  const Grid& g = *grid;
  SpectralField F;
  F.grid = grid;
  F.c.resize(g.total);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // Fixed flat-index order; never parallelized (reproducibility).
  for (std::size_t i = 0; i < g.total; ++i) {
    const double w = std::pow(1.0 + g.table.k2[i], -0.5 * decay);
    const double re = gauss(rng), im = gauss(rng);
    F.c[i] = w * cplx(re, im);
  }
  ComplexField f = to_physical(F);
  const double sup = lq_norm(f, std::numeric_limits<double>::infinity());
  if (sup > 0.0) {
    const double scale = amplitude / sup;
    cplx* u = f.data();
    par_for(g.total, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) u[i] *= scale;
    });
  }
  return f;
}

ComplexField cyclic_translate(const ComplexField& f,
                              const std::vector<int>& shift) {
  const Grid& g = f.grid();
  if (shift.size() != static_cast<std::size_t>(g.axes))
    fail(ErrorKind::validation, "cyclic_translate: shift needs d+n entries");
  ComplexField out(f.grid_ptr());
  const cplx* in = f.data();
  cplx* o = out.data();
  par_for(g.total, [&](std::size_t b, std::size_t e) {
    std::vector<int> id(static_cast<std::size_t>(g.axes));
    for (std::size_t i = b; i < e; ++i) {
      g.unflatten(i, id.data());
      for (int a = 0; a < g.axes; ++a) {
        const int count = g.dims[static_cast<std::size_t>(a)];
        id[static_cast<std::size_t>(a)] =
            ((id[static_cast<std::size_t>(a)] - shift[static_cast<std::size_t>(a)]) %
                 count +
             count) %
            count;
      }
      o[i] = in[g.flatten(id.data())];
    }
  });
  return out;
}

void save_checkpoint(const std::string& path, const ComplexField& f) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open checkpoint for writing: " + path);
  const Grid& g = f.grid();
  out.write("WGDL1\0", 6);
  auto put_u32 = [&](std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
  };
  auto put_f64 = [&](double v) {
    out.write(reinterpret_cast<const char*>(&v), 8);
  };
  put_u32(static_cast<std::uint32_t>(g.d));
  put_u32(static_cast<std::uint32_t>(g.n));
  for (int a = 0; a < g.axes; ++a)
    put_u32(static_cast<std::uint32_t>(g.dims[static_cast<std::size_t>(a)]));
  put_f64(g.spec.box_half_length);
  put_f64(g.spec.torus_period);
  out.write(reinterpret_cast<const char*>(f.data()),
            static_cast<std::streamsize>(f.size() * sizeof(cplx)));
  if (!out) fail(ErrorKind::io, "checkpoint write failed: " + path);
}

ComplexField load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open checkpoint: " + path);
  char magic[6];
  in.read(magic, 6);
  if (!in || std::memcmp(magic, "WGDL1\0", 6) != 0)
    fail(ErrorKind::io, "bad checkpoint magic: " + path);
  auto get_u32 = [&]() {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  auto get_f64 = [&]() {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  GridSpec spec;
  spec.euclid_dims = static_cast<int>(get_u32());
  spec.torus_dims = static_cast<int>(get_u32());
  std::vector<int> counts(static_cast<std::size_t>(spec.euclid_dims + spec.torus_dims));
  for (int& c : counts) c = static_cast<int>(get_u32());
  spec.box_half_length = get_f64();
  spec.torus_period = get_f64();
  for (int a = 0; a < spec.euclid_dims; ++a)
    if (counts[static_cast<std::size_t>(a)] != counts[0])
      fail(ErrorKind::io, "checkpoint has non-uniform Euclidean axis counts");
  for (int a = spec.euclid_dims; a < spec.euclid_dims + spec.torus_dims; ++a)
    if (counts[static_cast<std::size_t>(a)] !=
        counts[static_cast<std::size_t>(spec.euclid_dims)])
      fail(ErrorKind::io, "checkpoint has non-uniform torus axis counts");
  spec.points_euclid = spec.euclid_dims > 0 ? counts[0] : 0;
  spec.points_torus =
      spec.torus_dims > 0 ? counts[static_cast<std::size_t>(spec.euclid_dims)] : 0;
  if (!in) fail(ErrorKind::io, "truncated checkpoint header: " + path);

  ComplexField f(make_grid(spec));
  in.read(reinterpret_cast<char*>(f.data()),
          static_cast<std::streamsize>(f.size() * sizeof(cplx)));
  if (!in) fail(ErrorKind::io, "truncated checkpoint payload: " + path);
  return f;
}

}  // namespace wgdl
