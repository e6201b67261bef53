#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "wgdl/diagnostics.hpp"
#include "wgdl/field.hpp"
#include "wgdl/grid.hpp"
#include "wgdl/propagator.hpp"
#include "wgdl/threading.hpp"

using wgdl::ComplexField;
using wgdl::cplx;
using wgdl::DiagnosticsConfig;
using wgdl::DiagnosticsRecord;
using wgdl::Error;
using wgdl::ErrorKind;

namespace {

std::shared_ptr<const wgdl::Grid> grid_of(int d, int n, int pe, int pt,
                                          double L) {
  wgdl::GridSpec s;
  s.euclid_dims = d;
  s.torus_dims = n;
  s.points_euclid = pe;
  s.points_torus = pt;
  s.box_half_length = L;
  return wgdl::make_grid(s);
}

const double kInf = std::numeric_limits<double>::infinity();

double relgap(double x, double y) {
  return std::abs(x - y) / std::max(1.0, std::abs(y));
}

}  // namespace

TEST_CASE("mass and split energies on closed-form fields") {
  auto g = grid_of(1, 1, 16, 8, wgdl::kPi);
  const double V = g->volume;

  ComplexField pw = wgdl::make_plane_wave_modes(g, {2, 1});
  CHECK(relgap(wgdl::mass(pw), V) < 1e-12);
  // Single coefficient at |k|^2 = 5: kinetic = (1/2) V |k|^{2m}.
  CHECK(relgap(wgdl::kinetic_energy(pw, 2), 0.5 * V * 25.0) < 1e-12);
  CHECK(relgap(wgdl::kinetic_energy(pw, 1), 0.5 * V * 5.0) < 1e-12);

  ComplexField uniform(g);
  const cplx c0(0.3, 0.4);  // |c| = 1/2
  for (std::size_t i = 0; i < uniform.size(); ++i) uniform[i] = c0;
  const double c4 = std::pow(std::norm(c0), 2.0);
  CHECK(relgap(wgdl::potential_energy(uniform, 2.0, 1.0), V * c4 / 4.0) <
        1e-12);
  CHECK(relgap(wgdl::potential_energy(uniform, 2.0, -1.0), -V * c4 / 4.0) <
        1e-12);
  CHECK_THROWS_AS(wgdl::potential_energy(uniform, 0.0, 1.0), Error);
  CHECK_THROWS_AS(wgdl::kinetic_energy(pw, 3), Error);

  ComplexField zero(g);
  CHECK(wgdl::mass(zero) == 0.0);
  CHECK(wgdl::kinetic_energy(zero, 2) == 0.0);
  CHECK(wgdl::potential_energy(zero, 2.0, 1.0) == 0.0);

  auto gg = grid_of(1, 1, 32, 8, 6.0);
  wgdl::GaussianSpec spec;
  spec.amplitude = 0.9;
  ComplexField gf = wgdl::make_gaussian(gg, spec).field;
  DiagnosticsConfig cfg;
  const double e = wgdl::energy(gf, cfg);
  const double k = wgdl::kinetic_energy(gf, cfg.m);
  const double pot = wgdl::potential_energy(gf, cfg.p, cfg.lambda);
  CHECK(std::abs(e - (k + pot)) < 1e-13 * std::max(1.0, std::abs(e)));
  CHECK(e > k);  // defocusing potential is positive
  CHECK(k > 0.0);
}

TEST_CASE("windowed cube mass: full window, concentration, translation") {
  auto g = grid_of(1, 1, 32, 4, 4.0);  // dx = 0.25
  wgdl::GaussianSpec spec;
  spec.width = 0.5;
  ComplexField f = wgdl::make_gaussian(g, spec).field;
  const double total = wgdl::mass(f);

  // Window covering the whole line returns the total mass.
  wgdl::CubeMass full = wgdl::sup_cube_mass(f, 8.0);
  CHECK(relgap(full.value, total) < 1e-12);

  // The half-width rounds down to whole cells.
  wgdl::CubeMass rounded = wgdl::sup_cube_mass(f, 0.9);
  CHECK(rounded.effective_r == doctest::Approx(0.75).epsilon(1e-15));

  // A width-0.5 bump keeps ~erf(2) of its mass inside |x| <= 1.
  wgdl::CubeMass local = wgdl::sup_cube_mass(f, 1.0);
  CHECK(local.effective_r == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(local.value > 0.95 * total);
  CHECK(local.value <= total * (1.0 + 1e-12));

  // The sup over centers is exactly translation invariant.
  ComplexField shifted = wgdl::cyclic_translate(f, {7, 0});
  wgdl::CubeMass moved = wgdl::sup_cube_mass(shifted, 1.0);
  CHECK(std::abs(moved.value - local.value) < 1e-12 * total);

  CHECK_THROWS_AS(wgdl::sup_cube_mass(f, 8.1), Error);   // beyond 2L
  CHECK_THROWS_AS(wgdl::sup_cube_mass(f, 0.1), Error);   // below one cell
  wgdl::GridSpec ts;
  ts.euclid_dims = 0;
  ts.torus_dims = 1;
  ts.points_torus = 8;
  ComplexField torus_only(wgdl::make_grid(ts));
  CHECK_THROWS_AS(wgdl::sup_cube_mass(torus_only, 1.0), Error);
}

TEST_CASE("marginals integrate the fibers") {
  auto g = grid_of(1, 1, 32, 8, 6.0);
  const double period = g->spec.torus_period;

  wgdl::GaussianSpec spec;
  spec.amplitude = 0.8;
  ComplexField f = wgdl::make_gaussian(g, spec).field;
  wgdl::Marginals mg = wgdl::marginals(f);
  REQUIRE(mg.rho.size() == g->euclid_count);
  REQUIRE(mg.current.size() == 1);

  // Fiber-constant field: rho = period |f|^2, and a real field carries no
  // current.
  for (std::size_t node = 0; node < g->euclid_count; ++node) {
    const double expect =
        period * std::norm(f[node * g->torus_count]);
    CHECK(std::abs(mg.rho[node] - expect) < 1e-12 * std::max(1.0, expect));
    CHECK(std::abs(mg.current[0][node]) < 1e-13);
  }

  // rho integrates back to the mass.
  ComplexField r = wgdl::random_smooth_field(g, 17);
  wgdl::Marginals mr = wgdl::marginals(r);
  double acc = 0.0;
  for (double v : mr.rho) acc += v;
  acc *= g->dx;
  CHECK(relgap(acc, wgdl::mass(r)) < 1e-12);

  // Boosted band-limited envelope: J = k rho pointwise at roundoff. (A
  // truncated Gaussian envelope would leak ~1e-9 through its box seam; a trig
  // polynomial keeps the identity exact on the grid.)
  const double k1 = wgdl::kPi / 6.0;   // Euclidean base mode
  const double kb = 2.0 * k1;          // envelope mode
  ComplexField b(g);
  for (std::size_t node = 0; node < g->euclid_count; ++node) {
    const double x = g->coord(0, static_cast<int>(node));
    const double env = 0.8 * (1.0 + 0.6 * std::cos(kb * x));
    const std::complex<double> val =
        env * std::polar(1.0, k1 * x);
    for (std::size_t t = 0; t < g->torus_count; ++t)
      b[node * g->torus_count + t] = val;
  }
  wgdl::Marginals mb = wgdl::marginals(b);
  for (std::size_t node = 0; node < g->euclid_count; ++node) {
    const double expect =
        k1 * period * std::norm(b[node * g->torus_count]);
    CHECK(std::abs(mb.current[0][node] - expect) <
          1e-13 * std::max(1.0, std::abs(expect)));
  }
}

TEST_CASE("pair action: transform path equals the definitional double sum") {
  // d = 1 with a torus fiber.
  {
    auto g = grid_of(1, 1, 16, 4, 3.0);
    ComplexField f = wgdl::random_smooth_field(g, 29);
    const double fft = wgdl::morawetz_action(f);
    const double brute = wgdl::morawetz_action_bruteforce(f);
    CHECK(std::abs(fft - brute) <= 1e-10 * std::max(1.0, std::abs(brute)));

    // Conjugation flips the current and with it the action.
    ComplexField c = f;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = std::conj(c[i]);
    CHECK(std::abs(wgdl::morawetz_action(c) + fft) <=
          1e-12 * std::max(1.0, std::abs(fft)));
  }
  // d = 2 with a torus fiber.
  {
    auto g = grid_of(2, 1, 8, 4, 3.0);
    ComplexField f = wgdl::random_smooth_field(g, 31);
    const double fft = wgdl::morawetz_action(f);
    const double brute = wgdl::morawetz_action_bruteforce(f);
    CHECK(std::abs(fft - brute) <= 1e-10 * std::max(1.0, std::abs(brute)));
  }
  // Pure Euclidean line, no fiber.
  {
    auto g = grid_of(1, 0, 16, 0, 3.0);
    ComplexField f = wgdl::random_smooth_field(g, 37);
    const double fft = wgdl::morawetz_action(f);
    const double brute = wgdl::morawetz_action_bruteforce(f);
    CHECK(std::abs(fft - brute) <= 1e-10 * std::max(1.0, std::abs(brute)));

    // A real field has no current: both routes vanish.
    ComplexField real_f = f;
    for (std::size_t i = 0; i < real_f.size(); ++i)
      real_f[i] = cplx(real_f[i].real(), 0.0);
    CHECK(std::abs(wgdl::morawetz_action(real_f)) < 1e-12);
    CHECK(std::abs(wgdl::morawetz_action_bruteforce(real_f)) < 1e-12);
  }
  // A plane wave has flat marginals; the odd kernel integrates to zero.
  {
    auto g = grid_of(1, 1, 16, 4, 3.0);
    ComplexField pw = wgdl::make_plane_wave_modes(g, {2, 0});
    CHECK(std::abs(wgdl::morawetz_action(pw)) < 1e-9);
    CHECK(std::abs(wgdl::morawetz_action(pw) -
                   wgdl::morawetz_action_bruteforce(pw)) < 1e-10);
  }
  // Oracle guard on large Euclidean grids.
  {
    auto g = grid_of(2, 0, 128, 0, 8.0);
    ComplexField f(g);
    try {
      (void)wgdl::morawetz_action_bruteforce(f);
      FAIL("expected the pair-sum size guard to fire");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::size_guard);
    }
  }
}

TEST_CASE("pair-action derivative groups behave as designed") {
  DiagnosticsConfig cfg;  // m = 2, p = 2, lambda = +1

  // Fiber-constant data: both torus-derivative groups vanish.
  {
    auto g = grid_of(1, 1, 16, 4, 4.0);
    wgdl::GaussianSpec spec;
    spec.amplitude = 0.7;
    spec.modulation = {1, 0};
    ComplexField f = wgdl::make_gaussian(g, spec).field;
    wgdl::RhsTerms terms = wgdl::morawetz_rhs_terms(f, cfg);
    const double scale = std::abs(terms.m1_plus_m2) + 1.0;
    CHECK(std::abs(terms.term_I) < 1e-12 * scale);
    CHECK(std::abs(terms.term_II) < 1e-12 * scale);
    CHECK(std::abs(terms.term_I -
                   (terms.i_hessian_part + terms.i_cross_part)) <
          1e-12 * scale);
    CHECK(std::abs(terms.sign_definite_part -
                   (terms.i_hessian_part + terms.term_II)) < 1e-12 * scale);
  }

  // Real data: the mixed current-against-current group vanishes.
  {
    auto g = grid_of(1, 1, 16, 8, 4.0);
    ComplexField f = wgdl::random_smooth_field(g, 41);
    for (std::size_t i = 0; i < f.size(); ++i)
      f[i] = cplx(f[i].real(), 0.0);
    wgdl::RhsTerms terms = wgdl::morawetz_rhs_terms(f, cfg);
    const double scale = std::abs(terms.m1_plus_m2) + 1.0;
    CHECK(std::abs(terms.i_cross_part) < 1e-12 * scale);
  }

  // d = 5: the designated part is non-positive on random states.
  {
    auto g = grid_of(5, 1, 4, 4, 2.0);
    for (std::uint64_t seed : {101ULL, 102ULL}) {
      ComplexField f = wgdl::random_smooth_field(g, seed);
      wgdl::RhsTerms terms = wgdl::morawetz_rhs_terms(f, cfg);
      const double scale = std::abs(terms.m1_plus_m2) + 1.0;
      CHECK(terms.sign_definite_part <= 1e-10 * scale);
    }
  }

  // The group sum is the time derivative of the pair action: compare with a
  // central difference along the actual flow. The derivative marginals carry
  // second and third derivatives of u, so the grid needs headroom above the
  // field's own bandwidth; 64 points on this box leave the splitting error
  // (O(dt^2), about 2e-6 relative at dt = 1e-4) as the dominant gap.
  {
    auto g = grid_of(1, 1, 64, 8, 6.0);
    wgdl::GaussianSpec spec;
    spec.amplitude = 0.8;
    spec.modulation = {1, 1};
    ComplexField f = wgdl::make_gaussian(g, spec).field;

    wgdl::SolverConfig scfg;
    scfg.dt = 1e-4;
    wgdl::SolverState st;
    st.field = f;
    const double m_minus = wgdl::morawetz_action(st.field);
    REQUIRE(wgdl::strang_step(st, scfg));
    wgdl::RhsTerms mid = wgdl::morawetz_rhs_terms(st.field, cfg);
    REQUIRE(wgdl::strang_step(st, scfg));
    const double m_plus = wgdl::morawetz_action(st.field);

    const double fd = (m_plus - m_minus) / (2.0 * scfg.dt);
    const double rhs = mid.sum();
    CHECK(std::abs(fd - rhs) <= 1e-4 * std::max(1.0, std::abs(rhs)));
  }

  // Second-order flow and oversized grids are rejected.
  {
    auto g = grid_of(1, 1, 16, 4, 4.0);
    ComplexField f = wgdl::random_smooth_field(g, 43);
    DiagnosticsConfig nls = cfg;
    nls.m = 1;
    CHECK_THROWS_AS(wgdl::morawetz_rhs_terms(f, nls), Error);

    auto big = grid_of(2, 0, 128, 0, 8.0);
    ComplexField bf(big);
    try {
      (void)wgdl::morawetz_rhs_terms(bf, cfg);
      FAIL("expected the pair-sum size guard to fire");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::size_guard);
    }
  }
}

TEST_CASE("scattering residual vanishes exactly along the free flow") {
  auto g = grid_of(1, 1, 32, 8, 6.0);
  wgdl::GaussianSpec spec;
  spec.amplitude = 0.8;
  ComplexField f = wgdl::make_gaussian(g, spec).field;

  CHECK(wgdl::scattering_residual(f, 0.4, f, 0.4, 2) == 0.0);

  for (int m : {2, 1}) {
    wgdl::SolverConfig cfg;
    cfg.m = m;
    cfg.nonlinear = false;
    cfg.dt = 1e-3;
    cfg.t_end = 0.05;
    cfg.record_every = 25;
    wgdl::EvolveOptions opt;
    opt.diag.m = m;
    opt.diag.with_morawetz = false;
    std::vector<ComplexField> snaps;
    std::vector<double> times;
    opt.on_record = [&](const DiagnosticsRecord& rec, const ComplexField& u) {
      snaps.push_back(u);
      times.push_back(rec.t);
    };
    wgdl::EvolveResult res = wgdl::evolve(cfg, f, opt);
    REQUIRE(res.status == wgdl::EvolveStatus::ok);
    REQUIRE(snaps.size() == 3);  // t = 0, 0.025, 0.05
    const double r01 =
        wgdl::scattering_residual(snaps[0], times[0], snaps[1], times[1], m);
    const double r12 =
        wgdl::scattering_residual(snaps[1], times[1], snaps[2], times[2], m);
    CHECK(r01 < 1e-12);
    CHECK(r12 < 1e-12);
  }

  // The nonlinear flow leaves a visible residual.
  wgdl::SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.05;
  cfg.record_every = 50;
  wgdl::EvolveOptions opt;
  opt.diag.with_morawetz = false;
  std::vector<ComplexField> snaps;
  std::vector<double> times;
  opt.on_record = [&](const DiagnosticsRecord& rec, const ComplexField& u) {
    snaps.push_back(u);
    times.push_back(rec.t);
  };
  wgdl::EvolveResult res = wgdl::evolve(cfg, f, opt);
  REQUIRE(res.status == wgdl::EvolveStatus::ok);
  CHECK(wgdl::scattering_residual(snaps.front(), times.front(), snaps.back(),
                                  times.back(), 2) > 1e-6);

  auto other = grid_of(1, 1, 16, 8, 6.0);
  ComplexField small(other);
  CHECK_THROWS_AS(wgdl::scattering_residual(f, 0.0, small, 0.0, 2), Error);
  CHECK_THROWS_AS(wgdl::scattering_residual(f, 0.0, f, 0.0, 3), Error);
}

TEST_CASE("trapezoid accumulators and the boundedness quotient") {
  const auto rec_at = [](double t, double integrand, double h2) {
    DiagnosticsRecord r;
    r.t = t;
    r.morawetz_integrand = integrand;
    r.h2_norm = h2;
    return r;
  };

  // Hand trapezoid: values 1, 3 on spacing 1/2 -> integral 1.
  std::vector<DiagnosticsRecord> two = {rec_at(0.0, 1.0, 2.0),
                                        rec_at(0.5, 3.0, 1.9)};
  wgdl::MorawetzLhs lhs = wgdl::morawetz_lhs_accumulate(two);
  CHECK(lhs.integral == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lhs.c_test == doctest::Approx(1.0 / 16.0).epsilon(1e-13));

  // Constant integrand v over [0, T] integrates to v T.
  std::vector<DiagnosticsRecord> flat;
  for (int i = 0; i <= 10; ++i) flat.push_back(rec_at(0.1 * i, 2.5, 1.0));
  CHECK(wgdl::morawetz_lhs_accumulate(flat).integral ==
        doctest::Approx(2.5).epsilon(1e-12));

  std::vector<DiagnosticsRecord> single = {rec_at(0.0, 7.0, 2.0)};
  CHECK(wgdl::morawetz_lhs_accumulate(single).integral == 0.0);
  CHECK(wgdl::morawetz_lhs_accumulate(single).c_test == 0.0);

  std::vector<DiagnosticsRecord> zero_h2 = {rec_at(0.0, 1.0, 0.0),
                                            rec_at(1.0, 1.0, 0.0)};
  CHECK(wgdl::morawetz_lhs_accumulate(zero_h2).c_test == 0.0);

  std::vector<DiagnosticsRecord> ragged = {rec_at(0.0, 1.0, 1.0),
                                           rec_at(0.5, 1.0, 1.0),
                                           rec_at(1.25, 1.0, 1.0)};
  CHECK_THROWS_AS(wgdl::morawetz_lhs_accumulate(ragged), Error);
  CHECK_THROWS_AS(wgdl::morawetz_lhs_accumulate({}), Error);

  // Spacetime accumulation: constant series, exact trapezoid, sup mode.
  std::vector<std::pair<double, double>> series = {{0.0, 3.0},
                                                   {0.5, 3.0},
                                                   {1.0, 3.0}};
  CHECK(wgdl::spacetime_norm_accumulate(series, 2.0) ==
        doctest::Approx(3.0).epsilon(1e-13));
  std::vector<std::pair<double, double>> ramp = {{0.0, 1.0}, {1.0, 2.0}};
  CHECK(wgdl::spacetime_norm_accumulate(ramp, 2.0) ==
        doctest::Approx(std::sqrt(2.5)).epsilon(1e-13));
  std::vector<std::pair<double, double>> bumpy = {{0.0, 1.0},
                                                  {0.5, 4.0},
                                                  {1.0, 2.0}};
  CHECK(wgdl::spacetime_norm_accumulate(bumpy, kInf) == 4.0);
  CHECK_THROWS_AS(wgdl::spacetime_norm_accumulate(bumpy, 0.5), Error);
  CHECK_THROWS_AS(wgdl::spacetime_norm_accumulate({}, 2.0), Error);

  // The spatial factor at (m, gamma) = (2, 0) collapses to the L2 norm.
  auto g = grid_of(1, 1, 16, 8, 5.0);
  ComplexField f = wgdl::random_smooth_field(g, 47);
  const double sf = wgdl::spatial_factor(f, 2.0, 0.0);
  CHECK(relgap(sf, std::sqrt(wgdl::mass(f))) < 1e-12);
  const double sup_prof = wgdl::spatial_factor(f, kInf, 0.0);
  CHECK(sup_prof > 0.0);
  CHECK(sup_prof <= sf / std::sqrt(g->dx));  // sup <= (sum/dx)^{1/2} scale
  CHECK_THROWS_AS(wgdl::spatial_factor(f, 0.5, 0.0), Error);
}

TEST_CASE("localized product quotient is bounded and refinement-stable") {
  // White-box formula check at d = n = 1 (q* = 4).
  {
    auto g = grid_of(1, 1, 32, 8, 6.0);
    ComplexField f = wgdl::random_smooth_field(g, 53);
    const double r = 1.5;
    const double expect =
        wgdl::lq_norm(f, 4.0) /
        (std::pow(wgdl::sup_cube_mass(f, r).value, 0.5) *
         std::pow(wgdl::sobolev_norm(f, 1.0), 0.5));
    CHECK(relgap(wgdl::gn_ratio(f, r), expect) < 1e-12);
  }

  // Gaussian family: the quotient stays order-one bounded.
  double worst = 0.0;
  auto coarse = grid_of(1, 1, 32, 8, 6.0);
  auto fine = grid_of(1, 1, 64, 8, 6.0);
  for (int j = 0; j < 20; ++j) {
    wgdl::GaussianSpec spec;
    spec.width = 0.6 + 0.1 * j;
    spec.amplitude = 0.4 + 0.05 * j;
    if (j % 3 == 0) spec.modulation = {1, 0};
    if (j % 3 == 1) spec.modulation = {0, 1};
    ComplexField fc = wgdl::make_gaussian(coarse, spec).field;
    const double rc = wgdl::gn_ratio(fc, 1.5);
    CHECK(rc > 0.0);
    worst = std::max(worst, rc);

    // r = 1.5 is an exact multiple of both spacings, so the window agrees
    // and the quotient converges spectrally.
    ComplexField ff = wgdl::make_gaussian(fine, spec).field;
    const double rf = wgdl::gn_ratio(ff, 1.5);
    CHECK(std::abs(rc - rf) < 0.2 * rc);
  }
  CHECK(worst < 10.0);
}

TEST_CASE("decay report: windows, warnings, and pre-wrap filtering") {
  const auto rec_with = [](double t, double v1035, double gn, bool wrap) {
    DiagnosticsRecord r;
    r.t = t;
    r.lq_norms = {{"10/3", v1035}};
    r.gn = gn;
    r.post_wrap = wrap;
    return r;
  };
  std::vector<DiagnosticsRecord> series = {
      rec_with(0.0, 4.0, 0.5, false), rec_with(0.1, 3.0, 0.8, false),
      rec_with(0.2, 2.5, 0.6, false), rec_with(0.3, 2.0, 0.7, false),
      rec_with(0.4, 9.0, 9.9, true)};  // post-wrap bounce is ignored

  const std::vector<std::pair<std::string, double>> q_list = {
      {"10/3", 10.0 / 3.0}, {"5", 5.0}, {"7/3", 7.0 / 3.0}};
  wgdl::DecayReport rep = wgdl::decay_report(series, q_list, 2, 1);
  CHECK(rep.prewrap_records == 4);
  CHECK(rep.max_gn == doctest::Approx(0.8).epsilon(1e-15));
  REQUIRE(rep.rows.size() == 3);

  const wgdl::DecayRow& main = rep.rows[0];
  CHECK(main.in_range);  // 10/3 = 2 + 4/(d+n) exactly at d=2, n=1
  CHECK(main.initial == 4.0);
  CHECK(main.final_prewrap == 2.0);
  CHECK(main.ratio == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(main.frac_decreasing == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(main.monotone);

  CHECK_FALSE(rep.rows[1].in_range);  // q = 5 beyond the window
  CHECK(rep.rows[2].in_range);        // 7/3 lies inside (2, 10/3]
  bool warned_range = false, warned_missing = false;
  for (const std::string& w : rep.warnings) {
    if (w.find("5") != std::string::npos &&
        w.find("outside") != std::string::npos)
      warned_range = true;
    if (w.find("7/3") != std::string::npos &&
        w.find("not present") != std::string::npos)
      warned_missing = true;
  }
  CHECK(warned_range);
  CHECK(warned_missing);

  // A zero initial value reports ratio 0 rather than dividing by zero.
  std::vector<DiagnosticsRecord> zero_series = {rec_with(0.0, 0.0, 0.0, false),
                                                rec_with(0.1, 0.0, 0.0, false)};
  wgdl::DecayReport zrep =
      wgdl::decay_report(zero_series, {{"10/3", 10.0 / 3.0}}, 2, 1);
  CHECK(zrep.rows[0].ratio == 0.0);
}

TEST_CASE("records serialize to a stable ten-key NDJSON object") {
  auto g = grid_of(1, 1, 16, 8, 5.0);
  ComplexField f = wgdl::random_smooth_field(g, 59);

  DiagnosticsConfig cfg;
  cfg.q_values = {{"10/3", 10.0 / 3.0}, {"inf", kInf}};
  cfg.r_values = {{"1", 1.0}};
  cfg.with_gn = true;
  cfg.gn_r = 1.0;
  DiagnosticsRecord rec = wgdl::compute_record(f, 0.25, cfg, false);

  CHECK(rec.energy == doctest::Approx(rec.kinetic + rec.potential)
                          .epsilon(1e-14));
  CHECK(rec.sup_abs == wgdl::lq_norm(f, kInf));
  CHECK(rec.h1_norm > 0.0);
  CHECK(rec.gn > 0.0);
  REQUIRE(rec.cube_mass.size() == 1);
  CHECK(relgap(rec.morawetz_integrand,
               std::pow(rec.cube_mass.front().second, 3.0)) < 1e-13);

  const std::string line = wgdl::to_ndjson(rec);
  nlohmann::json j = nlohmann::json::parse(line);
  REQUIRE(j.is_object());
  CHECK(j.size() == 10);
  for (const char* key : {"t", "mass", "energy", "kinetic", "potential", "lq",
                          "cube_mass", "morawetz", "h2", "post_wrap"})
    CHECK(j.contains(key));
  CHECK(j["t"].get<double>() == rec.t);
  CHECK(j["mass"].get<double>() == rec.mass);          // shortest round trip
  CHECK(j["h2"].get<double>() == rec.h2_norm);
  CHECK(j["morawetz"].get<double>() == rec.morawetz_action);
  CHECK(j["post_wrap"].is_boolean());
  CHECK_FALSE(j["post_wrap"].get<bool>());
  REQUIRE(j["lq"].size() == 2);
  CHECK(j["lq"]["10/3"].get<double>() == rec.lq_norms[0].second);
  CHECK(j["lq"]["inf"].get<double>() == rec.lq_norms[1].second);
  CHECK(j["cube_mass"]["1"].get<double>() == rec.cube_mass[0].second);

  // Records and serialization are independent of the worker count.
  const std::string base = line;
  for (int threads : {2, 4}) {
    wgdl::set_thread_count(threads);
    DiagnosticsRecord again = wgdl::compute_record(f, 0.25, cfg, false);
    CHECK(wgdl::to_ndjson(again) == base);
  }
  wgdl::set_thread_count(1);

  const std::string header = wgdl::csv_header(rec);
  CHECK(header ==
        "t,mass,energy,kinetic,potential,lq:10/3,lq:inf,cube_mass:1,"
        "morawetz,h2,post_wrap");
  const std::string row = wgdl::to_csv_row(rec);
  const auto commas = [](const std::string& s) {
    return std::count(s.begin(), s.end(), ',');
  };
  CHECK(commas(row) == commas(header));
  CHECK(row.find("false") != std::string::npos);
}
