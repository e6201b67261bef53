#include "wgdl/diagnostics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "wgdl/morawetz_algebra.hpp"
#include "wgdl/threading.hpp"

namespace wgdl {

namespace {

constexpr std::size_t kPairSumGuard = 10000;  // max Euclidean nodes for oracles

double euclid_cell(const Grid& g) {
  return g.d > 0 ? std::pow(g.dx, g.d) : 1.0;
}

double torus_cell(const Grid& g) {
  return g.n > 0 ? std::pow(g.dalpha, g.n) : 1.0;
}

// Row-major strides over the Euclidean axes alone (torus axes are the
// innermost of the full layout, so full index = euclid_node * torus_count).
std::vector<std::size_t> euclid_strides(const Grid& g) {
  std::vector<std::size_t> s(static_cast<std::size_t>(std::max(g.d, 1)), 1);
  for (int a = g.d - 2; a >= 0; --a)
    s[static_cast<std::size_t>(a)] =
        s[static_cast<std::size_t>(a + 1)] *
        static_cast<std::size_t>(g.dims[static_cast<std::size_t>(a + 1)]);
  return s;
}

// Euclidean coordinates per axis for every Euclidean node.
std::vector<std::vector<double>> euclid_coords(const Grid& g) {
  const auto es = euclid_strides(g);
  std::vector<std::vector<double>> x(static_cast<std::size_t>(g.d));
  for (int a = 0; a < g.d; ++a)
    x[static_cast<std::size_t>(a)].resize(g.euclid_count);
  for (std::size_t e = 0; e < g.euclid_count; ++e) {
    for (int a = 0; a < g.d; ++a) {
      const std::size_t idx =
          (e / es[static_cast<std::size_t>(a)]) %
          static_cast<std::size_t>(g.dims[static_cast<std::size_t>(a)]);
      x[static_cast<std::size_t>(a)][e] = g.coord(a, static_cast<int>(idx));
    }
  }
  return x;
}

double kinetic_from_spectral(const SpectralField& F, int m) {
  if (m != 1 && m != 2)
    fail(ErrorKind::validation, "kinetic: dispersion order must be 1 or 2");
  const Grid& g = *F.grid;
  const double* sym = (m == 2 ? g.table.k4 : g.table.k2).data();
  const cplx* c = F.c.data();
  const double acc = par_sum(g.total, [&](std::size_t b, std::size_t e) {
    double a = 0.0;
    for (std::size_t i = b; i < e; ++i) a += sym[i] * std::norm(c[i]);
    return a;
  });
  return 0.5 * g.volume * acc;
}

// Torus-fiber reduction of a pointwise real integrand.
template <typename Fn>
std::vector<double> fiber_reduce(const Grid& g, Fn&& integrand) {
  const double cell_t = torus_cell(g);
  std::vector<double> out(g.euclid_count);
  const std::size_t tc = g.torus_count;
  par_for(g.euclid_count, [&](std::size_t b, std::size_t e) {
    for (std::size_t node = b; node < e; ++node) {
      double acc = 0.0;
      const std::size_t base = node * tc;
      for (std::size_t t = 0; t < tc; ++t) acc += integrand(base + t);
      out[node] = acc * cell_t;
    }
  });
  return out;
}

std::vector<double> rho_marginal(const ComplexField& f) {
  const cplx* u = f.data();
  return fiber_reduce(f.grid(),
                      [u](std::size_t i) { return std::norm(u[i]); });
}

CubeMass sup_cube_from_rho(const Grid& g, std::vector<double> rho, double r) {
  if (g.d < 1)
    fail(ErrorKind::validation,
         "sup_cube_mass: requires at least one Euclidean axis");
  if (!(r >= g.dx))
    fail(ErrorKind::validation,
         "sup_cube_mass: half-width below one grid spacing");
  if (r > 2.0 * g.spec.box_half_length)
    fail(ErrorKind::validation, "sup_cube_mass: half-width larger than the box");
  const int m = static_cast<int>(std::floor(r / g.dx + 1e-12));
  CubeMass out;
  out.effective_r = m * g.dx;

  const auto es = euclid_strides(g);
  std::vector<double> cur = std::move(rho), next(g.euclid_count);
  for (int a = 0; a < g.d; ++a) {
    const int count = g.dims[static_cast<std::size_t>(a)];
    const std::size_t stride = es[static_cast<std::size_t>(a)];
    const int window = std::min(2 * m + 1, count);
    const int half = window / 2;  // window is odd unless capped at count
    for (std::size_t base = 0; base < g.euclid_count; ++base) {
      if ((base / stride) % static_cast<std::size_t>(count) != 0) continue;
      // one line along axis a starting at `base`
      if (window == count) {
        double s = 0.0;
        for (int j = 0; j < count; ++j)
          s += cur[base + static_cast<std::size_t>(j) * stride];
        for (int j = 0; j < count; ++j)
          next[base + static_cast<std::size_t>(j) * stride] = s;
        continue;
      }
      double s = 0.0;
      for (int o = -half; o <= half; ++o)
        s += cur[base + static_cast<std::size_t>((o + count) % count) * stride];
      for (int j = 0; j < count; ++j) {
        next[base + static_cast<std::size_t>(j) * stride] = s;
        const int add = (j + 1 + half) % count;
        const int drop = (j + 1 - half - 1 + 2 * count) % count;
        s += cur[base + static_cast<std::size_t>(add) * stride] -
             cur[base + static_cast<std::size_t>(drop) * stride];
      }
    }
    std::swap(cur, next);
  }
  double best = 0.0;
  for (double v : cur) best = std::max(best, v);
  out.value = best * euclid_cell(g);
  return out;
}

// Spectral multiplier in the c_k normalization; mul(i) in FFT order.
template <typename Fn>
ComplexField spectral_multiply(const SpectralField& F, Fn&& mul) {
  SpectralField G;
  G.grid = F.grid;
  G.c.resize(F.c.size());
  const cplx* in = F.c.data();
  cplx* out = G.c.data();
  par_for(F.c.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = mul(i) * in[i];
  });
  return to_physical(G);
}

// i k_axis multiplier table lookup for flat index i
struct AxisK {
  const double* k;
  std::size_t stride;
  std::size_t count;
  double at(std::size_t i) const { return k[(i / stride) % count]; }
};

AxisK axis_k(const Grid& g, int axis) {
  return {g.table.axis[static_cast<std::size_t>(axis)].data(),
          g.strides[static_cast<std::size_t>(axis)],
          static_cast<std::size_t>(g.dims[static_cast<std::size_t>(axis)])};
}

// Skew-adjoint variant for odd-order derivative factors (Nyquist zeroed).
AxisK axis_k_d1(const Grid& g, int axis) {
  return {g.table.axis_d1[static_cast<std::size_t>(axis)].data(),
          g.strides[static_cast<std::size_t>(axis)],
          static_cast<std::size_t>(g.dims[static_cast<std::size_t>(axis)])};
}

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

double mass(const ComplexField& f) {
  const cplx* u = f.data();
  const double acc = par_sum(f.size(), [&](std::size_t b, std::size_t e) {
    double a = 0.0;
    for (std::size_t i = b; i < e; ++i) a += std::norm(u[i]);
    return a;
  });
  return f.grid().cell_volume * acc;
}

double kinetic_energy(const ComplexField& f, int m) {
  return kinetic_from_spectral(to_spectral(f), m);
}

double potential_energy(const ComplexField& f, double p, double lambda) {
  if (p <= 0.0) fail(ErrorKind::validation, "potential: p must be > 0");
  const cplx* u = f.data();
  const double half_pp2 = 0.5 * (p + 2.0);
  const double acc = par_sum(f.size(), [&](std::size_t b, std::size_t e) {
    double a = 0.0;
    for (std::size_t i = b; i < e; ++i) a += std::pow(std::norm(u[i]), half_pp2);
    return a;
  });
  return lambda / (p + 2.0) * f.grid().cell_volume * acc;
}

double energy(const ComplexField& f, const DiagnosticsConfig& cfg) {
  return kinetic_energy(f, cfg.m) + potential_energy(f, cfg.p, cfg.lambda);
}

CubeMass sup_cube_mass(const ComplexField& f, double r) {
  return sup_cube_from_rho(f.grid(), rho_marginal(f), r);
}

Marginals marginals(const ComplexField& f) {
  const Grid& g = f.grid();
  Marginals out;
  out.rho = rho_marginal(f);
  out.current.resize(static_cast<std::size_t>(g.d));
  if (g.d == 0) return out;
  const SpectralField F = to_spectral(f);
  const cplx* u = f.data();
  for (int a = 0; a < g.d; ++a) {
    const AxisK kx = axis_k_d1(g, a);
    const ComplexField du =
        spectral_multiply(F, [&](std::size_t i) { return cplx(0.0, kx.at(i)); });
    const cplx* dp = du.data();
    out.current[static_cast<std::size_t>(a)] =
        fiber_reduce(g, [u, dp](std::size_t i) {
          return std::imag(std::conj(u[i]) * dp[i]);
        });
  }
  return out;
}

double morawetz_action(const ComplexField& f) {
  const Grid& g = f.grid();
  if (g.d < 1)
    fail(ErrorKind::validation,
         "morawetz_action: requires at least one Euclidean axis");
  const Marginals mg = marginals(f);

  // doubled box for zero-padded linear convolution
  std::vector<int> pd(static_cast<std::size_t>(g.d));
  std::size_t P = 1;
  for (int a = 0; a < g.d; ++a) {
    pd[static_cast<std::size_t>(a)] = 2 * g.dims[static_cast<std::size_t>(a)];
    P *= static_cast<std::size_t>(pd[static_cast<std::size_t>(a)]);
  }
  std::vector<std::size_t> ps(static_cast<std::size_t>(g.d), 1);
  for (int a = g.d - 2; a >= 0; --a)
    ps[static_cast<std::size_t>(a)] =
        ps[static_cast<std::size_t>(a + 1)] *
        static_cast<std::size_t>(pd[static_cast<std::size_t>(a + 1)]);
  const auto es = euclid_strides(g);

  // original-node positions inside the padded array
  std::vector<std::size_t> place(g.euclid_count);
  for (std::size_t e = 0; e < g.euclid_count; ++e) {
    std::size_t flat = 0;
    for (int a = 0; a < g.d; ++a) {
      const std::size_t idx =
          (e / es[static_cast<std::size_t>(a)]) %
          static_cast<std::size_t>(g.dims[static_cast<std::size_t>(a)]);
      flat += idx * ps[static_cast<std::size_t>(a)];
    }
    place[e] = flat;
  }

  std::vector<cplx> pad(P, cplx(0.0, 0.0)), rho_hat(P), ker(P), ker_hat(P),
      conv(P);
  for (std::size_t e = 0; e < g.euclid_count; ++e)
    pad[place[e]] = mg.rho[e];
  fft_nd_raw(pd, pad.data(), rho_hat.data(), true);

  const double dxe = euclid_cell(g);
  double action = 0.0;
  for (int comp = 0; comp < g.d; ++comp) {
    // kernel grad_comp a at the signed displacement of each padded index
    par_for(P, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        double r2 = 0.0, zc = 0.0;
        bool valid = true;
        for (int a = 0; a < g.d; ++a) {
          const int count = g.dims[static_cast<std::size_t>(a)];
          const int mi = static_cast<int>(
              (i / ps[static_cast<std::size_t>(a)]) %
              static_cast<std::size_t>(pd[static_cast<std::size_t>(a)]));
          if (mi == count) {  // displacement never reaches +/-N
            valid = false;
            break;
          }
          const int s = mi < count ? mi : mi - 2 * count;
          const double z = s * g.dx;
          r2 += z * z;
          if (a == comp) zc = z;
        }
        ker[i] = valid ? cplx(zc / std::sqrt(1.0 + r2), 0.0) : cplx(0.0, 0.0);
      }
    });
    fft_nd_raw(pd, ker.data(), ker_hat.data(), true);
    par_for(P, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) ker[i] = ker_hat[i] * rho_hat[i];
    });
    fft_nd_raw(pd, ker.data(), conv.data(), false);
    const double scale = 1.0 / static_cast<double>(P);
    const std::vector<double>& J = mg.current[static_cast<std::size_t>(comp)];
    action += par_sum(g.euclid_count, [&](std::size_t b, std::size_t e) {
      double a = 0.0;
      for (std::size_t i = b; i < e; ++i)
        a += J[i] * std::real(conv[place[i]]) * scale;
      return a;
    });
  }
  return 4.0 * action * dxe * dxe;
}

double morawetz_action_bruteforce(const ComplexField& f) {
  const Grid& g = f.grid();
  if (g.d < 1)
    fail(ErrorKind::validation,
         "morawetz_action_bruteforce: requires at least one Euclidean axis");
  if (g.euclid_count > kPairSumGuard)
    fail(ErrorKind::size_guard,
         "morawetz_action_bruteforce: Euclidean grid above the oracle guard");

  const SpectralField F = to_spectral(f);
  const cplx* u = f.data();
  std::vector<std::vector<double>> imj(static_cast<std::size_t>(g.d));
  for (int a = 0; a < g.d; ++a) {
    const AxisK kx = axis_k_d1(g, a);
    const ComplexField du =
        spectral_multiply(F, [&](std::size_t i) { return cplx(0.0, kx.at(i)); });
    imj[static_cast<std::size_t>(a)].resize(g.total);
    for (std::size_t i = 0; i < g.total; ++i)
      imj[static_cast<std::size_t>(a)][i] =
          std::imag(std::conj(u[i]) * du[i]);
  }
  std::vector<double> abs2(g.total);
  for (std::size_t i = 0; i < g.total; ++i) abs2[i] = std::norm(u[i]);

  const auto xs = euclid_coords(g);
  const std::size_t tc = g.torus_count;
  double acc = 0.0;
  for (std::size_t A = 0; A < g.total; ++A) {
    const std::size_t ea = A / tc;
    for (std::size_t B = 0; B < g.total; ++B) {
      const std::size_t eb = B / tc;
      double r2 = 0.0;
      double dot = 0.0;
      for (int a = 0; a < g.d; ++a) {
        const double z = xs[static_cast<std::size_t>(a)][ea] -
                         xs[static_cast<std::size_t>(a)][eb];
        r2 += z * z;
        dot += z * (imj[static_cast<std::size_t>(a)][A] * abs2[B] -
                    imj[static_cast<std::size_t>(a)][B] * abs2[A]);
      }
      acc += dot / std::sqrt(1.0 + r2);
    }
  }
  const double cell = g.cell_volume;
  return 2.0 * cell * cell * acc;
}

RhsTerms morawetz_rhs_terms(const ComplexField& f, const DiagnosticsConfig& cfg) {
  const Grid& g = f.grid();
  if (cfg.m != 2)
    fail(ErrorKind::validation,
         "morawetz_rhs_terms: decomposition implemented for the fourth-order "
         "flow only");
  if (g.d < 1)
    fail(ErrorKind::validation,
         "morawetz_rhs_terms: requires at least one Euclidean axis");
  if (g.euclid_count > kPairSumGuard)
    fail(ErrorKind::size_guard,
         "morawetz_rhs_terms: Euclidean grid above the pair-sum guard");

  const SpectralField F = to_spectral(f);
  const cplx* u = f.data();
  const std::size_t d = static_cast<std::size_t>(g.d);
  const std::size_t n = static_cast<std::size_t>(g.n);

  // derivative fields (physical space)
  std::vector<ComplexField> du(d);
  std::vector<std::vector<ComplexField>> d2u(d, std::vector<ComplexField>(d));
  std::vector<ComplexField> dlap(d);
  std::vector<ComplexField> dtu(n);
  std::vector<std::vector<ComplexField>> dxdtu(d, std::vector<ComplexField>(n));
  const std::vector<double>& k2e = g.k2_euclid();
  for (std::size_t i = 0; i < d; ++i) {
    const AxisK ki = axis_k_d1(g, static_cast<int>(i));
    const AxisK ki_full = axis_k(g, static_cast<int>(i));
    du[i] = spectral_multiply(
        F, [&](std::size_t m) { return cplx(0.0, ki.at(m)); });
    dlap[i] = spectral_multiply(F, [&](std::size_t m) {
      return cplx(0.0, -ki.at(m) * k2e[m]);
    });
    for (std::size_t j = i; j < d; ++j) {
      // Diagonal entries keep the full wavenumber so the Hessian trace matches
      // the Laplacian; mixed entries pair two odd factors.
      if (j == i) {
        d2u[i][i] = spectral_multiply(F, [&](std::size_t m) {
          const double k = ki_full.at(m);
          return cplx(-k * k, 0.0);
        });
        continue;
      }
      const AxisK kj = axis_k_d1(g, static_cast<int>(j));
      d2u[i][j] = spectral_multiply(F, [&](std::size_t m) {
        return cplx(-ki.at(m) * kj.at(m), 0.0);
      });
    }
    for (std::size_t gam = 0; gam < n; ++gam) {
      const AxisK kg = axis_k_d1(g, g.d + static_cast<int>(gam));
      dxdtu[i][gam] = spectral_multiply(F, [&](std::size_t m) {
        return cplx(-ki.at(m) * kg.at(m), 0.0);
      });
    }
  }
  const ComplexField lapx = spectral_multiply(
      F, [&](std::size_t m) { return cplx(-k2e[m], 0.0); });
  for (std::size_t gam = 0; gam < n; ++gam) {
    const AxisK kg = axis_k_d1(g, g.d + static_cast<int>(gam));
    dtu[gam] = spectral_multiply(
        F, [&](std::size_t m) { return cplx(0.0, kg.at(m)); });
  }
  const auto second = [&](std::size_t i, std::size_t j) -> const ComplexField& {
    return i <= j ? d2u[i][j] : d2u[j][i];
  };

  // torus-integrated marginals on the Euclidean grid
  const std::vector<double> rho = rho_marginal(f);
  const double half_pp2 = 0.5 * (cfg.p + 2.0);
  const std::vector<double> pmarg = fiber_reduce(g, [&](std::size_t i) {
    return std::pow(std::norm(u[i]), half_pp2);
  });
  std::vector<std::vector<double>> J(d), J4(d), Jg(d);
  std::vector<std::vector<std::vector<double>>> G(d), K(d), h(d);
  for (std::size_t i = 0; i < d; ++i) {
    G[i].resize(d);
    K[i].resize(d);
    h[i].resize(d);
    const cplx* dui = du[i].data();
    J[i] = fiber_reduce(g, [&](std::size_t m) {
      return std::imag(std::conj(u[m]) * dui[m]);
    });
    const cplx* dli = dlap[i].data();
    const cplx* lx = lapx.data();
    J4[i] = fiber_reduce(g, [&](std::size_t m) {
      return std::imag(std::conj(u[m]) * dli[m] -
                       std::conj(dui[m]) * lx[m]);
    });
    Jg[i] = fiber_reduce(g, [&](std::size_t m) {
      double acc = 0.0;
      for (std::size_t gam = 0; gam < n; ++gam)
        acc += std::imag(std::conj(dtu[gam][m]) * dxdtu[i][gam][m]);
      return acc;
    });
    for (std::size_t j = 0; j < d; ++j) {
      const cplx* duj = du[j].data();
      G[i][j] = fiber_reduce(g, [&](std::size_t m) {
        return std::real(std::conj(dui[m]) * duj[m]);
      });
      K[i][j] = fiber_reduce(g, [&](std::size_t m) {
        double acc = 0.0;
        for (std::size_t l = 0; l < d; ++l)
          acc += std::real(std::conj(second(l, i)[m]) * second(l, j)[m]);
        return acc;
      });
      h[i][j] = fiber_reduce(g, [&](std::size_t m) {
        double acc = 0.0;
        for (std::size_t gam = 0; gam < n; ++gam)
          acc += std::real(std::conj(dxdtu[i][gam][m]) * dxdtu[j][gam][m]);
        return acc;
      });
    }
  }
  std::vector<double> ralpha(g.euclid_count, 0.0);
  if (n > 0)
    ralpha = fiber_reduce(g, [&](std::size_t m) {
      double acc = 0.0;
      for (std::size_t gam = 0; gam < n; ++gam)
        acc += std::norm(dtu[gam][m]);
      return acc;
    });
  std::vector<double> trG(g.euclid_count, 0.0), trK(g.euclid_count, 0.0),
      trh(g.euclid_count, 0.0);
  for (std::size_t e = 0; e < g.euclid_count; ++e)
    for (std::size_t i = 0; i < d; ++i) {
      trG[e] += G[i][i][e];
      trK[e] += K[i][i][e];
      trh[e] += h[i][i][e];
    }

  // pair sums against the closed-form weight derivatives
  const auto xs = euclid_coords(g);
  const double bracket_coef =
      -4.0 * cfg.lambda * cfg.p / (cfg.p + 2.0);
  double t_tri = 0.0, t_bilapG = 0.0, t_hlG = 0.0, t_hK = 0.0, t_hJ4 = 0.0;
  double t_hh = 0.0, t_hJg = 0.0, t_bilapA = 0.0, t_lapP = 0.0;
  std::vector<double> z(d);
  for (std::size_t x = 0; x < g.euclid_count; ++x) {
    for (std::size_t y = 0; y < g.euclid_count; ++y) {
      double r2 = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        z[a] = xs[a][x] - xs[a][y];
        r2 += z[a] * z[a];
      }
      const double r = std::sqrt(r2);
      const double w_lap = weight::lap(r, g.d);
      const double w_bilap = weight::bilap(r, g.d);
      const double w_trilap = weight::trilap(r, g.d);
      const weight::RadialPair w_h = weight::hess(r);
      const weight::RadialPair w_hl = weight::hess_lap(r, g.d);

      double qG = 0.0, qK = 0.0, qh = 0.0, zJ = 0.0, zJ4 = 0.0, zJg = 0.0;
      double JdotJ4 = 0.0, JdotJg = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        zJ += z[i] * J[i][x];
        zJ4 += z[i] * J4[i][y];
        zJg += z[i] * Jg[i][y];
        JdotJ4 += J[i][x] * J4[i][y];
        JdotJg += J[i][x] * Jg[i][y];
        for (std::size_t j = 0; j < d; ++j) {
          const double zz = z[i] * z[j];
          qG += zz * G[i][j][x];
          qK += zz * K[i][j][x];
          qh += zz * h[i][j][x];
        }
      }
      const double ry = rho[y];
      t_tri += w_trilap * rho[x] * ry;
      t_bilapG += w_bilap * trG[x] * ry;
      t_hlG += (w_hl.delta_coef * trG[x] + w_hl.outer_coef * qG) * ry;
      t_hK += (w_h.delta_coef * trK[x] + w_h.outer_coef * qK) * ry;
      t_hJ4 += w_h.delta_coef * JdotJ4 + w_h.outer_coef * zJ * zJ4;
      t_hh += (w_h.delta_coef * trh[x] + w_h.outer_coef * qh) * ry;
      t_hJg += w_h.delta_coef * JdotJg + w_h.outer_coef * zJ * zJg;
      t_bilapA += w_bilap * ralpha[x] * ry;
      t_lapP += w_lap * pmarg[x] * ry;
    }
  }
  const double dxe2 = euclid_cell(g) * euclid_cell(g);
  RhsTerms out;
  out.m1_plus_m2 = dxe2 * (-2.0 * t_tri + 4.0 * t_bilapG + 8.0 * t_hlG -
                           16.0 * t_hK - 8.0 * t_hJ4);
  out.i_hessian_part = dxe2 * (-16.0 * t_hh);
  out.i_cross_part = dxe2 * (16.0 * t_hJg);
  out.term_I = out.i_hessian_part + out.i_cross_part;
  out.term_II = dxe2 * (4.0 * t_bilapA);
  out.nonlinear_bracket = dxe2 * (bracket_coef * t_lapP);
  out.sign_definite_part = out.i_hessian_part + out.term_II;
  return out;
}

double scattering_residual(const ComplexField& u_t1, double t1,
                           const ComplexField& u_t2, double t2, int m) {
  if (m != 1 && m != 2)
    fail(ErrorKind::validation,
         "scattering_residual: dispersion order must be 1 or 2");
  const Grid& g1 = u_t1.grid();
  const Grid& g2 = u_t2.grid();
  const bool same = g1.dims == g2.dims &&
                    g1.spec.box_half_length == g2.spec.box_half_length &&
                    g1.spec.torus_period == g2.spec.torus_period &&
                    g1.d == g2.d && g1.n == g2.n;
  if (!same)
    fail(ErrorKind::validation, "scattering_residual: grid mismatch");
  const SpectralField F1 = to_spectral(u_t1);
  const SpectralField F2 = to_spectral(u_t2);
  const double sigma = m == 2 ? 1.0 : -1.0;
  const double* sym = (m == 2 ? g1.table.k4 : g1.table.k2).data();
  const double* k2 = g1.table.k2.data();
  const cplx* c1 = F1.c.data();
  const cplx* c2 = F2.c.data();
  const double acc = par_sum(g1.total, [&](std::size_t b, std::size_t e) {
    double a = 0.0;
    for (std::size_t i = b; i < e; ++i) {
      const cplx d = c1[i] * std::polar(1.0, -sigma * t1 * sym[i]) -
                     c2[i] * std::polar(1.0, -sigma * t2 * sym[i]);
      const double w = 1.0 + k2[i];
      a += w * w * std::norm(d);
    }
    return a;
  });
  return std::sqrt(g1.volume * acc);
}

namespace {

void require_uniform_spacing(const std::vector<double>& t, const char* who) {
  if (t.size() < 2) return;
  const double gap = t[1] - t[0];
  for (std::size_t i = 2; i < t.size(); ++i)
    if (std::abs((t[i] - t[i - 1]) - gap) > 1e-9 * std::max(1.0, std::abs(gap)))
      fail(ErrorKind::validation,
           std::string(who) + ": record series not uniformly spaced");
}

}  // namespace

MorawetzLhs morawetz_lhs_accumulate(const std::vector<DiagnosticsRecord>& series) {
  if (series.empty())
    fail(ErrorKind::validation, "morawetz_lhs_accumulate: empty series");
  std::vector<double> t(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) t[i] = series[i].t;
  require_uniform_spacing(t, "morawetz_lhs_accumulate");
  MorawetzLhs out;
  if (series.size() >= 2) {
    const double dt = t[1] - t[0];
    double acc = 0.5 * (series.front().morawetz_integrand +
                        series.back().morawetz_integrand);
    for (std::size_t i = 1; i + 1 < series.size(); ++i)
      acc += series[i].morawetz_integrand;
    out.integral = acc * dt;
  }
  const double h2 = series.front().h2_norm;
  out.c_test = h2 > 0.0 ? out.integral / (h2 * h2 * h2 * h2) : 0.0;
  return out;
}

double spatial_factor(const ComplexField& f, double m_exp, double gamma) {
  if (!(m_exp >= 1.0))
    fail(ErrorKind::validation, "spatial_factor: exponent must be >= 1");
  const Grid& g = f.grid();
  const std::vector<double> fac = mixed_sobolev_torus(f, gamma);
  if (std::isinf(m_exp)) {
    double best = 0.0;
    for (double v : fac) best = std::max(best, v);
    return best;
  }
  const double dxe = euclid_cell(g);
  double acc = 0.0;
  for (double v : fac) acc += std::pow(v, m_exp);
  return std::pow(dxe * acc, 1.0 / m_exp);
}

double spacetime_norm_accumulate(
    const std::vector<std::pair<double, double>>& series, double l) {
  if (series.empty())
    fail(ErrorKind::validation, "spacetime_norm_accumulate: empty series");
  if (!(l >= 1.0))
    fail(ErrorKind::validation, "spacetime_norm_accumulate: l must be >= 1");
  std::vector<double> t(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) t[i] = series[i].first;
  require_uniform_spacing(t, "spacetime_norm_accumulate");
  if (std::isinf(l)) {
    double best = 0.0;
    for (const auto& [tt, v] : series) best = std::max(best, v);
    return best;
  }
  if (series.size() < 2) return 0.0;
  const double dt = t[1] - t[0];
  double acc = 0.5 * (std::pow(series.front().second, l) +
                      std::pow(series.back().second, l));
  for (std::size_t i = 1; i + 1 < series.size(); ++i)
    acc += std::pow(series[i].second, l);
  return std::pow(acc * dt, 1.0 / l);
}

double gn_ratio(const ComplexField& f, double r) {
  const Grid& g = f.grid();
  const double dn = g.d + g.n;
  const double qstar = 2.0 + 4.0 / dn;
  const double lq = lq_norm(f, qstar);
  const double cube = sup_cube_mass(f, r).value;
  const double h1 = sobolev_norm(f, 1.0);
  const double den =
      std::pow(cube, 2.0 / (dn + 2.0)) * std::pow(h1, dn / (dn + 2.0));
  return den > 0.0 ? lq / den : 0.0;
}

DecayReport decay_report(const std::vector<DiagnosticsRecord>& series,
                         const std::vector<std::pair<std::string, double>>& q_list,
                         int d, int n) {
  DecayReport rep;
  std::vector<const DiagnosticsRecord*> pre;
  for (const auto& rec : series)
    if (!rec.post_wrap) pre.push_back(&rec);
  rep.prewrap_records = static_cast<int>(pre.size());
  for (const auto* rec : pre) rep.max_gn = std::max(rep.max_gn, rec->gn);

  const double q_hi = 2.0 + 4.0 / (d + n);
  for (const auto& [key, q] : q_list) {
    DecayRow row;
    row.key = key;
    row.q = q;
    row.in_range = q > 2.0 && q <= q_hi + 1e-12;
    if (!row.in_range)
      rep.warnings.push_back("q = " + key + " outside (2, 2+4/(d+n)]");
    std::vector<double> vals;
    for (const auto* rec : pre)
      for (const auto& [k, v] : rec->lq_norms)
        if (k == key) vals.push_back(v);
    if (vals.empty()) {
      rep.warnings.push_back("q = " + key + " not present in records");
      rep.rows.push_back(row);
      continue;
    }
    row.initial = vals.front();
    row.final_prewrap = vals.back();
    row.ratio = row.initial > 0.0 ? row.final_prewrap / row.initial : 0.0;
    int dec = 0;
    for (std::size_t i = 1; i < vals.size(); ++i)
      if (vals[i] < vals[i - 1]) ++dec;
    row.frac_decreasing =
        vals.size() > 1
            ? static_cast<double>(dec) / static_cast<double>(vals.size() - 1)
            : 0.0;
    row.monotone = vals.size() > 1 &&
                   dec == static_cast<int>(vals.size()) - 1;
    rep.rows.push_back(row);
  }
  return rep;
}

DiagnosticsRecord compute_record(const ComplexField& f, double t,
                                 const DiagnosticsConfig& cfg, bool post_wrap) {
  const Grid& g = f.grid();
  DiagnosticsRecord rec;
  rec.t = t;
  rec.post_wrap = post_wrap;
  rec.mass = mass(f);
  const SpectralField F = to_spectral(f);
  rec.kinetic = kinetic_from_spectral(F, cfg.m);
  rec.potential = potential_energy(f, cfg.p, cfg.lambda);
  rec.energy = rec.kinetic + rec.potential;
  rec.h2_norm = sobolev_norm(F, 2.0);
  rec.h1_norm = sobolev_norm(F, 1.0);
  rec.sup_abs = lq_norm(f, std::numeric_limits<double>::infinity());
  for (const auto& [key, q] : cfg.q_values)
    rec.lq_norms.emplace_back(key, lq_norm(f, q));
  if (g.d >= 1 && !cfg.r_values.empty()) {
    const std::vector<double> rho = rho_marginal(f);
    for (const auto& [key, r] : cfg.r_values)
      rec.cube_mass.emplace_back(key, sup_cube_from_rho(g, rho, r).value);
    rec.morawetz_integrand =
        std::pow(rec.cube_mass.front().second, 0.5 * (cfg.p + 4.0));
  }
  if (cfg.with_morawetz && g.d >= 1) rec.morawetz_action = morawetz_action(f);
  if (cfg.with_gn && g.d >= 1) rec.gn = gn_ratio(f, cfg.gn_r);
  return rec;
}

std::string to_ndjson(const DiagnosticsRecord& rec) {
  std::string s = "{\"t\":" + format_double(rec.t);
  s += ",\"mass\":" + format_double(rec.mass);
  s += ",\"energy\":" + format_double(rec.energy);
  s += ",\"kinetic\":" + format_double(rec.kinetic);
  s += ",\"potential\":" + format_double(rec.potential);
  s += ",\"lq\":{";
  for (std::size_t i = 0; i < rec.lq_norms.size(); ++i) {
    if (i) s += ",";
    s += "\"" + rec.lq_norms[i].first +
         "\":" + format_double(rec.lq_norms[i].second);
  }
  s += "},\"cube_mass\":{";
  for (std::size_t i = 0; i < rec.cube_mass.size(); ++i) {
    if (i) s += ",";
    s += "\"" + rec.cube_mass[i].first +
         "\":" + format_double(rec.cube_mass[i].second);
  }
  s += "},\"morawetz\":" + format_double(rec.morawetz_action);
  s += ",\"h2\":" + format_double(rec.h2_norm);
  s += ",\"post_wrap\":";
  s += rec.post_wrap ? "true" : "false";
  s += "}";
  return s;
}

std::string csv_header(const DiagnosticsRecord& rec) {
  std::string s = "t,mass,energy,kinetic,potential";
  for (const auto& [key, v] : rec.lq_norms) s += ",lq:" + key;
  for (const auto& [key, v] : rec.cube_mass) s += ",cube_mass:" + key;
  s += ",morawetz,h2,post_wrap";
  return s;
}

std::string to_csv_row(const DiagnosticsRecord& rec) {
  std::string s = format_double(rec.t);
  s += "," + format_double(rec.mass);
  s += "," + format_double(rec.energy);
  s += "," + format_double(rec.kinetic);
  s += "," + format_double(rec.potential);
  for (const auto& [key, v] : rec.lq_norms) s += "," + format_double(v);
  for (const auto& [key, v] : rec.cube_mass) s += "," + format_double(v);
  s += "," + format_double(rec.morawetz_action);
  s += "," + format_double(rec.h2_norm);
  s += rec.post_wrap ? ",true" : ",false";
  return s;
}

}  // namespace wgdl
