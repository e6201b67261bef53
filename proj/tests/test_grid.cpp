#include <doctest.h>

#include <cmath>
#include <complex>

#include "wgdl/field.hpp"
#include "wgdl/grid.hpp"

using namespace wgdl;

namespace {

std::shared_ptr<const Grid> grid_of(int d, int n, int pe, int pt, double L,
                                    double period = 2.0 * kPi) {
  GridSpec gs;
  gs.euclid_dims = d;
  gs.torus_dims = n;
  gs.points_euclid = pe;
  gs.points_torus = pt;
  gs.box_half_length = L;
  gs.torus_period = period;
  return make_grid(gs);
}

}  // namespace

TEST_CASE("unit-spacing box produces integer wavenumbers in FFT order") {
  auto g = grid_of(1, 1, 8, 8, kPi);
  const std::vector<double> expect = {0, 1, 2, 3, -4, -3, -2, -1};
  REQUIRE(g->table.axis[0].size() == 8);
  for (int j = 0; j < 8; ++j)
    CHECK(g->table.axis[0][static_cast<std::size_t>(j)] ==
          doctest::Approx(expect[static_cast<std::size_t>(j)]).epsilon(1e-15));
  // torus axis with period 2*pi also has integer wavenumbers
  for (int j = 0; j < 8; ++j)
    CHECK(g->table.axis[1][static_cast<std::size_t>(j)] ==
          doctest::Approx(expect[static_cast<std::size_t>(j)]).epsilon(1e-15));
}

TEST_CASE("total point count multiplies all axes") {
  auto g = grid_of(5, 1, 8, 8, 1.0);
  CHECK(g->total == 262144u);  // 8^6
  CHECK(g->euclid_count == 32768u);
  CHECK(g->torus_count == 8u);
}

TEST_CASE("construction rejects bad sampling and lengths") {
  CHECK_THROWS_AS(grid_of(1, 0, 2, 0, 1.0), Error);   // count < 4
  CHECK_THROWS_AS(grid_of(1, 1, 8, 3, 1.0), Error);   // torus count < 4
  CHECK_THROWS_AS(grid_of(1, 0, 8, 0, 0.0), Error);   // zero length
  CHECK_THROWS_AS(grid_of(1, 0, 8, 0, -2.0), Error);  // negative length
  CHECK_THROWS_AS(grid_of(1, 1, 8, 8, 1.0, 0.0), Error);
  CHECK_THROWS_AS(grid_of(-1, 0, 8, 0, 1.0), Error);
}

TEST_CASE("pure-torus grids are allowed for fiber-only work") {
  auto g = grid_of(0, 1, 0, 8, 0.0);
  CHECK(g->d == 0);
  CHECK(g->total == 8u);
  CHECK(g->volume == doctest::Approx(2.0 * kPi));
}

TEST_CASE("dispersion symbol on single modes") {
  auto g = grid_of(2, 0, 8, 0, kPi);  // unit wavenumber spacing
  int idx[2] = {1, 0};                // k = (1, 0)
  const std::size_t f10 = g->flatten(idx);
  CHECK(dispersion_symbol(g->table, 4)[f10] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(dispersion_symbol(g->table, 2)[f10] == doctest::Approx(1.0).epsilon(1e-15));
  int idx12[2] = {1, 2};  // k = (1, 2): |k|^2 = 5, |k|^4 = 25
  const std::size_t f12 = g->flatten(idx12);
  CHECK(dispersion_symbol(g->table, 4)[f12] == doctest::Approx(25.0).epsilon(1e-15));
  int idx0[2] = {0, 0};
  const std::size_t f0 = g->flatten(idx0);
  CHECK(dispersion_symbol(g->table, 2)[f0] == 0.0);
  CHECK(dispersion_symbol(g->table, 4)[f0] == 0.0);
  CHECK_THROWS_AS(dispersion_symbol(g->table, 3), Error);
}

TEST_CASE("symbols are symmetric under k -> -k exactly") {
  auto g = grid_of(2, 1, 8, 4, 2.5);
  const auto& k2 = g->table.k2;
  const auto& k4 = g->table.k4;
  std::vector<int> idx(static_cast<std::size_t>(g->axes));
  std::vector<int> neg(static_cast<std::size_t>(g->axes));
  for (std::size_t f = 0; f < g->total; ++f) {
    g->unflatten(f, idx.data());
    for (int a = 0; a < g->axes; ++a) {
      const int count = g->dims[static_cast<std::size_t>(a)];
      neg[static_cast<std::size_t>(a)] =
          (count - idx[static_cast<std::size_t>(a)]) % count;
    }
    const std::size_t fn = g->flatten(neg.data());
    CHECK(k2[f] == k2[fn]);
    CHECK(k4[f] == k4[fn]);
  }
}

TEST_CASE("every axis carries the zero wavenumber and symbols are nonnegative") {
  auto g = grid_of(2, 1, 8, 4, 1.5, 3.0);
  for (int a = 0; a < g->axes; ++a) {
    bool has_zero = false;
    for (double k : g->table.axis[static_cast<std::size_t>(a)])
      if (k == 0.0) has_zero = true;
    CHECK(has_zero);
  }
  for (double v : g->table.k2) CHECK(v >= 0.0);
  for (double v : g->table.k4) CHECK(v >= 0.0);
}

TEST_CASE("Parseval consistency between physical and spectral norms") {
  auto g = grid_of(2, 1, 16, 8, 3.0);
  const ComplexField f = random_smooth_field(g, 7, 2.5, 1.3);
  const double phys = lq_norm(f, 2.0);
  const SpectralField F = to_spectral(f);
  double spec2 = 0.0;
  for (const cplx& c : F.c) spec2 += std::norm(c);
  spec2 *= g->volume;
  CHECK(std::abs(phys * phys - spec2) <= 1e-12 * phys * phys);
}

TEST_CASE("coordinates span the declared ranges") {
  auto g = grid_of(1, 1, 8, 4, 2.0, 4.0);
  CHECK(g->coord(0, 0) == doctest::Approx(-2.0));   // Euclidean starts at -L
  CHECK(g->coord(0, 4) == doctest::Approx(0.0));
  CHECK(g->coord(0, 7) == doctest::Approx(1.5));    // last point L - dx
  CHECK(g->coord(1, 0) == doctest::Approx(0.0));    // torus starts at 0
  CHECK(g->coord(1, 3) == doctest::Approx(3.0));
  CHECK(g->dx == doctest::Approx(0.5));
  CHECK(g->dalpha == doctest::Approx(1.0));
}

TEST_CASE("cell volume and total volume are consistent") {
  auto g = grid_of(2, 1, 8, 4, 2.0, 4.0);
  CHECK(g->cell_volume ==
        doctest::Approx(0.5 * 0.5 * 1.0).epsilon(1e-14));
  CHECK(g->volume == doctest::Approx(4.0 * 4.0 * 4.0).epsilon(1e-14));
  CHECK(g->cell_volume * static_cast<double>(g->total) ==
        doctest::Approx(g->volume).epsilon(1e-14));
}

TEST_CASE("flatten and unflatten are inverse") {
  auto g = grid_of(2, 1, 8, 4, 1.0);
  std::vector<int> idx(3);
  for (std::size_t f = 0; f < g->total; f += 7) {
    g->unflatten(f, idx.data());
    CHECK(g->flatten(idx.data()) == f);
  }
}

TEST_CASE("mode indices follow FFT convention") {
  auto g = grid_of(1, 0, 8, 0, 1.0);
  CHECK(g->mode_index(0, 0) == 0);
  CHECK(g->mode_index(0, 3) == 3);
  CHECK(g->mode_index(0, 4) == -4);
  CHECK(g->mode_index(0, 7) == -1);
}
