#include "wgdl/morawetz_algebra.hpp"

#include <cmath>
#include <random>

namespace wgdl::weight {

namespace {

// Single source for the closed forms that double as finite-difference
// profiles: the public double API and the extended-precision verification
// engine instantiate the same expressions.
template <typename T>
T bracket_t(T r) {
  return std::sqrt(T(1) + r * r);
}

template <typename T>
T lap_t(T r, int d) {
  const T b = bracket_t(r);
  return T(d - 1) / b + T(1) / (b * b * b);
}

template <typename T>
T bilap_t(T r, int d) {
  const T b = bracket_t(r);
  const T b3 = b * b * b, b5 = b3 * b * b, b7 = b5 * b * b;
  return -T((d - 1) * (d - 3)) / b3 - T(6 * (d - 3)) / b5 - T(15) / b7;
}

}  // namespace

double bracket(double r) { return bracket_t(r); }

double a(double r) { return bracket(r); }

double grad_coef(double r) { return 1.0 / bracket(r); }

double lap(double r, int d) { return lap_t(r, d); }

RadialPair hess(double r) {
  const double b = bracket(r);
  return {1.0 / b, -1.0 / (b * b * b)};
}

RadialPair hess_lap(double r, int d) {
  const double b = bracket(r);
  const double b3 = b * b * b, b5 = b3 * b * b, b7 = b5 * b * b;
  RadialPair p;
  p.delta_coef = -(d - 1) / b3 - 3.0 / b5;
  p.outer_coef = 3.0 * (d - 1) / b5 + 15.0 / b7;
  return p;
}

double bilap(double r, int d) { return bilap_t(r, d); }

double trilap(double r, int d) {
  const double b = bracket(r);
  const double b5 = std::pow(b, 5), b7 = std::pow(b, 7), b9 = std::pow(b, 9),
               b11 = std::pow(b, 11);
  return 3.0 * (d - 1) * (d - 3) * (d - 5) / b5 +
         45.0 * (d - 3) * (d - 5) / b7 + 315.0 * (d - 5) / b9 + 945.0 / b11;
}

Which which_from_string(const std::string& name) {
  if (name == "a") return Which::a;
  if (name == "grad") return Which::grad;
  if (name == "lap") return Which::lap;
  if (name == "hess") return Which::hess;
  if (name == "hess_lap") return Which::hess_lap;
  if (name == "bilap") return Which::bilap;
  if (name == "trilap") return Which::trilap;
  fail(ErrorKind::validation, "unknown weight-derivative selector: " + name);
}

std::string to_string(Which which) {
  switch (which) {
    case Which::a: return "a";
    case Which::grad: return "grad";
    case Which::lap: return "lap";
    case Which::hess: return "hess";
    case Which::hess_lap: return "hess_lap";
    case Which::bilap: return "bilap";
    case Which::trilap: return "trilap";
  }
  return "?";
}

bool is_matrix_valued(Which which) {
  return which == Which::hess || which == Which::hess_lap;
}

WeightEval eval_weight_derivative(Which which, double r, int d) {
  if (r < 0.0) fail(ErrorKind::validation, "eval_weight_derivative: r < 0");
  if (d < 1) fail(ErrorKind::validation, "eval_weight_derivative: d < 1");
  WeightEval out;
  switch (which) {
    case Which::a: out.scalar = a(r); break;
    case Which::grad: out.scalar = grad_coef(r); break;
    case Which::lap: out.scalar = lap(r, d); break;
    case Which::bilap: out.scalar = bilap(r, d); break;
    case Which::trilap: out.scalar = trilap(r, d); break;
    case Which::hess:
      out.pair = hess(r);
      out.matrix = true;
      break;
    case Which::hess_lap:
      out.pair = hess_lap(r, d);
      out.matrix = true;
      break;
  }
  return out;
}

namespace {

// The verification chain is anchored at the weight alone: grad/hess/lap are
// finite differences of a, hess_lap/bilap of the lap closed form, trilap of
// the bilap closed form. Every radial profile g(|z|) here is a smooth even
// function of z, so 6th-order *central* Cartesian stencils on the 2-plane
// z = (z1, z2) are well-conditioned at every radius including r = 0; the
// near-zero samples need no special-casing beyond the even continuation.
// Stencil arithmetic runs in extended precision: the d = 5 triple Laplacian
// decays like <r>^-11 while the two planar second derivatives it is built
// from decay like <r>^-5, so at r ~ 10 the combination cancels three to four
// digits and double-precision profile rounding alone would cap the check
// near 1e-6 relative.
using Profile = long double (*)(long double, int);

long double profile_a(long double r, int) { return bracket_t(r); }
long double profile_lap(long double r, int d) { return lap_t(r, d); }
long double profile_bilap(long double r, int d) { return bilap_t(r, d); }

// 6th-order central stencils for planar partials of F(z1,z2) = g(|z|)
// evaluated at (r, 0).
long double fd_d1_axis1(Profile g, long double r, int d, long double h) {
  auto F = [&](int i) { return g(std::abs(r + i * h), d); };
  return (-F(-3) + 9 * F(-2) - 45 * F(-1) + 45 * F(1) - 9 * F(2) + F(3)) /
         (60.0L * h);
}

long double fd_d2_axis1(Profile g, long double r, int d, long double h) {
  auto F = [&](int i) { return g(std::abs(r + i * h), d); };
  return (2 * F(-3) - 27 * F(-2) + 270 * F(-1) - 490 * F(0) + 270 * F(1) -
          27 * F(2) + 2 * F(3)) /
         (180.0L * h * h);
}

long double fd_d2_axis2(Profile g, long double r, int d, long double h) {
  auto F = [&](int i) { return g(std::hypot(r, i * h), d); };
  return (2 * F(-3) - 27 * F(-2) + 270 * F(-1) - 490 * F(0) + 270 * F(1) -
          27 * F(2) + 2 * F(3)) /
         (180.0L * h * h);
}

// d-dimensional Laplacian of the radial profile at |z| = r: by symmetry at
// z = (r, 0, ..., 0) all transverse second derivatives coincide, so
// lap = d2_axis1 + (d-1) * d2_axis2.
long double fd_lap(Profile g, long double r, int d, long double h) {
  return fd_d2_axis1(g, r, d, h) + (d - 1) * fd_d2_axis2(g, r, d, h);
}

long double fd_step(double r) { return 0.005L * std::max(1.0, 0.5 * r); }

double rel_err(long double approx, double exact) {
  return static_cast<double>(std::abs(approx - static_cast<long double>(exact))) /
         std::max(std::abs(exact), 1e-8);
}

// Matrix selectors are compared through the two well-conditioned
// contractions D e_radial and D e_tangential: with z = r e1 the closed form
// predicts s_rad = delta_coef + outer_coef r^2 and s_tan = delta_coef.
double matrix_error(Profile g, const RadialPair& closed, double r, int d,
                    long double h) {
  const long double s_rad_fd = fd_d2_axis1(g, r, d, h);
  const long double s_tan_fd = fd_d2_axis2(g, r, d, h);
  const double s_rad_cf = closed.delta_coef + closed.outer_coef * r * r;
  const double s_tan_cf = closed.delta_coef;
  return std::max(rel_err(s_rad_fd, s_rad_cf), rel_err(s_tan_fd, s_tan_cf));
}

double sample_error(Which which, double r, int d, long double h) {
  switch (which) {
    case Which::a:
      return 0.0;  // identity check
    case Which::grad:
      // Radial component of grad a at z = r e1 is grad_coef * r.
      return rel_err(fd_d1_axis1(profile_a, r, d, h), grad_coef(r) * r);
    case Which::lap:
      return rel_err(fd_lap(profile_a, r, d, h), lap(r, d));
    case Which::hess:
      return matrix_error(profile_a, hess(r), r, d, h);
    case Which::hess_lap:
      return matrix_error(profile_lap, hess_lap(r, d), r, d, h);
    case Which::bilap:
      return rel_err(fd_lap(profile_lap, r, d, h), bilap(r, d));
    case Which::trilap:
      return rel_err(fd_lap(profile_bilap, r, d, h), trilap(r, d));
  }
  return 0.0;
}

}  // namespace

FdProbe fd_probe(Which which, double r, int d) {
  if (r < 0.0) fail(ErrorKind::validation, "fd_probe: r < 0");
  if (d < 1) fail(ErrorKind::validation, "fd_probe: d < 1");
  const long double h = fd_step(r);
  FdProbe out;
  switch (which) {
    case Which::a:
      out.value = a(r);
      break;
    case Which::grad:
      out.value = fd_d1_axis1(profile_a, r, d, h);
      break;
    case Which::lap:
      out.value = fd_lap(profile_a, r, d, h);
      break;
    case Which::bilap:
      out.value = fd_lap(profile_lap, r, d, h);
      break;
    case Which::trilap:
      out.value = fd_lap(profile_bilap, r, d, h);
      break;
    case Which::hess:
      out.radial = fd_d2_axis1(profile_a, r, d, h);
      out.tangential = fd_d2_axis2(profile_a, r, d, h);
      break;
    case Which::hess_lap:
      out.radial = fd_d2_axis1(profile_lap, r, d, h);
      out.tangential = fd_d2_axis2(profile_lap, r, d, h);
      break;
  }
  return out;
}

FdReport fd_verify(Which which, int samples, std::uint64_t seed) {
  FdReport rep;
  rep.samples = samples;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> dim(3, 10);
  for (int i = 0; i < samples; ++i) {
    // Log spread over [0.1, 10] plus a cluster of near-zero radii.
    const double u = unif(rng);
    const double r = (i % 5 == 0) ? 1e-4 * u : std::pow(10.0, 2.0 * u - 1.0);
    const int d = dim(rng);
    const double err = sample_error(which, r, d, fd_step(r));
    if (err >= rep.max_rel_error) {
      rep.max_rel_error = err;
      rep.worst = {which, r, d, err};
    }
  }
  return rep;
}

FdReport fd_verify_all(int samples_per_selector, std::uint64_t seed) {
  FdReport rep;
  const Which all[] = {Which::a,        Which::grad,  Which::lap, Which::hess,
                       Which::hess_lap, Which::bilap, Which::trilap};
  for (Which w : all) {
    const FdReport r = fd_verify(w, samples_per_selector, seed++);
    rep.samples += r.samples;
    if (r.max_rel_error > rep.max_rel_error) {
      rep.max_rel_error = r.max_rel_error;
      rep.worst = r.worst;
    }
  }
  return rep;
}

DirectionalSplit directional_split(const std::vector<double>& g,
                                   const std::vector<double>& e) {
  if (g.size() != e.size())
    fail(ErrorKind::validation, "directional_split: dimension mismatch");
  double ee = 0.0, ge = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    ee += e[i] * e[i];
    ge += g[i] * e[i];
  }
  if (ee == 0.0)
    fail(ErrorKind::validation, "directional_split: e must be nonzero");
  DirectionalSplit out;
  out.along.resize(g.size());
  out.perp.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    out.along[i] = ge / ee * e[i];
    out.perp[i] = g[i] - out.along[i];
  }
  return out;
}

SignReport sign_certificates(int d_min, int d_max, int r_samples,
                             std::uint64_t seed) {
  if (d_min < 1 || d_max < d_min)
    fail(ErrorKind::validation, "sign_certificates: bad dimension range");
  if (r_samples < 2)
    fail(ErrorKind::validation, "sign_certificates: need >= 2 radius samples");
  SignReport rep;
  rep.r_samples = r_samples;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int d = d_min; d <= d_max; ++d) {
    SignEntry ent;
    ent.d = d;
    ent.quadratic_value = -static_cast<double>(d) * d - 8.0 * d + 45.0;
    ent.quadratic_pass = ent.quadratic_value <= 0.0;

    ent.trilap_pass = true;
    ent.bilap_pass = true;
    for (int i = 0; i < r_samples; ++i) {
      const double r = 100.0 * i / (r_samples - 1);
      if (ent.trilap_pass && trilap(r, d) < 0.0) {
        ent.trilap_pass = false;
        ent.trilap_witness_r = r;
      }
      if (ent.bilap_pass && bilap(r, d) > 0.0) {
        ent.bilap_pass = false;
        ent.bilap_witness_r = r;
      }
    }

    // Mixed quadratic form -|g|^2/<r>^3 - r^2 |g_perp|^2/<r>^3 <= 0 sampled
    // on random gradients g with direction e = z.
    ent.mixed_form_pass = true;
    for (int i = 0; i < 64; ++i) {
      std::vector<double> g(static_cast<std::size_t>(d)),
          z(static_cast<std::size_t>(d));
      for (auto& v : g) v = gauss(rng);
      double r2 = 0.0;
      for (auto& v : z) {
        v = gauss(rng);
        r2 += v * v;
      }
      if (r2 == 0.0) continue;
      const DirectionalSplit split = directional_split(g, z);
      double g2 = 0.0, gp2 = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        g2 += g[j] * g[j];
        gp2 += split.perp[j] * split.perp[j];
      }
      const double b3 = std::pow(bracket(std::sqrt(r2)), 3);
      if (-g2 / b3 - r2 * gp2 / b3 > 0.0) ent.mixed_form_pass = false;
    }
    rep.entries.push_back(ent);
  }
  return rep;
}

HessianReport hessian_bound_check(int samples, int d, std::uint64_t seed) {
  if (d < 1) fail(ErrorKind::validation, "hessian_bound_check: d < 1");
  HessianReport rep;
  rep.samples = samples;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  rep.max_violation = -1e300;
  for (int s = 0; s < samples; ++s) {
    const double r = (s % 16 == 0) ? 0.0 : std::pow(10.0, 2.0 * unif(rng) - 1.0);
    std::vector<std::complex<double>> H(static_cast<std::size_t>(d * d));
    for (auto& h : H) h = {gauss(rng), gauss(rng)};
    std::vector<double> z(static_cast<std::size_t>(d), 0.0);
    if (r > 0.0) {
      double nz = 0.0;
      for (auto& v : z) {
        v = gauss(rng);
        nz += v * v;
      }
      nz = std::sqrt(nz);
      for (auto& v : z) v *= r / nz;
    }

    double h_fro2 = 0.0;
    for (const auto& h : H) h_fro2 += std::norm(h);
    double hz2 = 0.0;
    for (int i = 0; i < d; ++i) {
      std::complex<double> row(0.0, 0.0);
      for (int j = 0; j < d; ++j)
        row += H[static_cast<std::size_t>(i * d + j)] *
               z[static_cast<std::size_t>(j)];
      hz2 += std::norm(row);
    }
    const double he2 = r > 0.0 ? hz2 / (r * r) : 0.0;

    const RadialPair hp = hess(r);
    // -hess_{jk} H_{ij} conj(H_{ik}) summed over i, against the projector
    // bound -(|H|^2 - |H e_hat|^2)/<r>.
    const double lhs = -(hp.delta_coef * h_fro2 + hp.outer_coef * hz2);
    const double rhs = -(h_fro2 - he2) / bracket(r);
    const double gap = lhs - rhs;  // must be <= 0
    if (gap > 1e-12 * std::max(1.0, std::abs(rhs))) ++rep.violations;
    rep.max_violation = std::max(rep.max_violation, gap);

    if (r == 0.0)
      rep.r0_equality_error =
          std::max(rep.r0_equality_error, std::abs(lhs - (-h_fro2)));
  }

  // Diagonal closed form: H = I gives -d/<r> + r^2/<r>^3.
  {
    const double r = 1.7;
    const RadialPair hp = hess(r);
    const double lhs = -(hp.delta_coef * d + hp.outer_coef * r * r);
    const double closed =
        -static_cast<double>(d) / bracket(r) + r * r / std::pow(bracket(r), 3);
    rep.diag_identity_error = std::abs(lhs - closed);
  }
  rep.pass = rep.violations == 0 && rep.diag_identity_error < 1e-12 &&
             rep.r0_equality_error < 1e-12;
  return rep;
}

}  // namespace wgdl::weight
