#include "wgdl/grid.hpp"

#include <cmath>
#include <string>

namespace wgdl {

namespace {

std::vector<double> fft_wavenumbers(int count, double base) {
  // FFT ordering: 0, 1, ..., N/2-1, -N/2, ..., -1 (times base spacing).
  std::vector<double> k(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    const int m = (j <= (count - 1) / 2) ? j : j - count;
    k[static_cast<std::size_t>(j)] = base * m;
  }
  return k;
}

}  // namespace

Grid::Grid(const GridSpec& s) : spec(s) {
  d = s.euclid_dims;
  n = s.torus_dims;
  if (d < 0 || n < 0 || d + n < 1)
    fail(ErrorKind::validation, "grid: need d >= 0, n >= 0, d + n >= 1");
  if (d > 0) {
    if (s.box_half_length <= 0.0)
      fail(ErrorKind::validation, "grid: box_half_length must be positive");
    if (s.points_euclid < 4)
      fail(ErrorKind::validation, "grid: points_euclid must be >= 4");
  }
  if (n > 0) {
    if (s.torus_period <= 0.0)
      fail(ErrorKind::validation, "grid: torus_period must be positive");
    if (s.points_torus < 4)
      fail(ErrorKind::validation, "grid: points_torus must be >= 4");
  }

  axes = d + n;
  dims.resize(static_cast<std::size_t>(axes));
  for (int a = 0; a < d; ++a) dims[static_cast<std::size_t>(a)] = s.points_euclid;
  for (int a = d; a < axes; ++a) dims[static_cast<std::size_t>(a)] = s.points_torus;

  total = 1;
  for (int v : dims) {
    total *= static_cast<std::size_t>(v);
    if (total > (std::size_t{1} << 28))
      fail(ErrorKind::validation, "grid: total point count exceeds 2^28");
  }
  strides.assign(static_cast<std::size_t>(axes), 1);
  for (int a = axes - 2; a >= 0; --a)
    strides[static_cast<std::size_t>(a)] =
        strides[static_cast<std::size_t>(a + 1)] *
        static_cast<std::size_t>(dims[static_cast<std::size_t>(a + 1)]);

  euclid_count = 1;
  for (int a = 0; a < d; ++a) euclid_count *= static_cast<std::size_t>(dims[a]);
  torus_count = total / euclid_count;

  dx = d > 0 ? 2.0 * s.box_half_length / s.points_euclid : 0.0;
  dalpha = n > 0 ? s.torus_period / s.points_torus : 0.0;
  cell_volume = 1.0;
  volume = 1.0;
  for (int a = 0; a < d; ++a) {
    cell_volume *= dx;
    volume *= 2.0 * s.box_half_length;
  }
  for (int a = d; a < axes; ++a) {
    cell_volume *= dalpha;
    volume *= s.torus_period;
  }

  table.axis.resize(static_cast<std::size_t>(axes));
  const double euclid_base = d > 0 ? kPi / s.box_half_length : 0.0;  // 2π/(2L)
  const double torus_base = n > 0 ? 2.0 * kPi / s.torus_period : 0.0;
  for (int a = 0; a < axes; ++a)
    table.axis[static_cast<std::size_t>(a)] =
        fft_wavenumbers(dims[static_cast<std::size_t>(a)],
                        a < d ? euclid_base : torus_base);
  table.axis_d1 = table.axis;
  for (int a = 0; a < axes; ++a) {
    const int na = dims[static_cast<std::size_t>(a)];
    if (na % 2 == 0)
      table.axis_d1[static_cast<std::size_t>(a)]
                   [static_cast<std::size_t>(na / 2)] = 0.0;
  }

  table.k2.resize(total);
  table.k4.resize(total);
  k2_euclid_.resize(total);
  std::vector<int> idx(static_cast<std::size_t>(axes), 0);
  for (std::size_t f = 0; f < total; ++f) {
    double k2 = 0.0, k2e = 0.0;
    for (int a = 0; a < axes; ++a) {
      const double k = table.axis[static_cast<std::size_t>(a)]
                                 [static_cast<std::size_t>(idx[a])];
      k2 += k * k;
      if (a < d) k2e += k * k;
    }
    table.k2[f] = k2;
    table.k4[f] = k2 * k2;
    k2_euclid_[f] = k2e;
    for (int a = axes - 1; a >= 0; --a) {
      if (++idx[static_cast<std::size_t>(a)] <
          dims[static_cast<std::size_t>(a)])
        break;
      idx[static_cast<std::size_t>(a)] = 0;
    }
  }
}

double Grid::coord(int axis, int index) const {
  if (axis < d) return -spec.box_half_length + dx * index;
  return dalpha * index;
}

int Grid::mode_index(int axis, int index) const {
  const int count = dims[static_cast<std::size_t>(axis)];
  return (index <= (count - 1) / 2) ? index : index - count;
}

void Grid::unflatten(std::size_t flat, int* idx) const {
  for (int a = 0; a < axes; ++a) {
    idx[a] = static_cast<int>(flat / strides[static_cast<std::size_t>(a)]);
    flat %= strides[static_cast<std::size_t>(a)];
  }
}

std::size_t Grid::flatten(const int* idx) const {
  std::size_t f = 0;
  for (int a = 0; a < axes; ++a)
    f += static_cast<std::size_t>(idx[a]) * strides[static_cast<std::size_t>(a)];
  return f;
}

std::shared_ptr<const Grid> make_grid(const GridSpec& spec) {
  return std::make_shared<const Grid>(spec);
}

const std::vector<double>& dispersion_symbol(const WaveNumberTable& table,
                                             int order) {
  if (order == 2) return table.k2;
  if (order == 4) return table.k4;
  fail(ErrorKind::validation,
       "dispersion_symbol: order must be 2 or 4, got " + std::to_string(order));
}

}  // namespace wgdl
