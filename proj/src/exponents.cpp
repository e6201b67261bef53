#include "wgdl/exponents.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace wgdl {

namespace {

using i64 = std::int64_t;
using i128 = __int128;

Rational reduce128(i128 n, i128 d) {
  if (d == 0) fail(ErrorKind::validation, "rational: division by zero");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  i128 a = n < 0 ? -n : n, b = d;
  while (b != 0) {
    const i128 t = a % b;
    a = b;
    b = t;
  }
  if (a != 0) {
    n /= a;
    d /= a;
  }
  const i128 lo = std::numeric_limits<i64>::min();
  const i128 hi = std::numeric_limits<i64>::max();
  if (n < lo || n > hi || d > hi)
    fail(ErrorKind::validation, "rational: 64-bit overflow");
  Rational r;
  r.num = static_cast<i64>(n);
  r.den = static_cast<i64>(d);
  return r;
}

void require_finite(const Rational& a, const char* op) {
  if (a.is_infinite())
    fail(ErrorKind::validation, std::string("rational: infinite operand in ") + op);
}

}  // namespace

Rational Rational::make(i64 n, i64 d) { return reduce128(n, d); }

Rational Rational::infinity() {
  Rational r;
  r.num = 1;
  r.den = 0;
  return r;
}

Rational Rational::reciprocal() const {
  if (is_infinite()) return Rational(0);
  if (num == 0) return infinity();
  if (num < 0)
    fail(ErrorKind::validation, "rational: reciprocal of negative not used");
  return reduce128(den, num);
}

double Rational::to_double() const {
  if (is_infinite()) return std::numeric_limits<double>::infinity();
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string Rational::str() const {
  if (is_infinite()) return "inf";
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

Rational Rational::parse(const std::string& text) {
  if (text.empty()) fail(ErrorKind::validation, "rational: empty literal");
  if (text == "inf") return infinity();
  const auto bad = [&]() -> Rational {
    fail(ErrorKind::validation, "rational: cannot parse '" + text + "'");
  };
  std::size_t i = 0;
  bool neg = false;
  if (text[i] == '+' || text[i] == '-') {
    neg = text[i] == '-';
    ++i;
  }
  // integer or exact decimal part
  i128 num = 0, den = 1;
  bool digits = false, dot = false;
  for (; i < text.size() && text[i] != '/'; ++i) {
    const char c = text[i];
    if (c == '.') {
      if (dot) return bad();
      dot = true;
      continue;
    }
    if (c < '0' || c > '9') return bad();
    num = num * 10 + (c - '0');
    if (dot) den *= 10;
    digits = true;
    if (num > (i128(1) << 62) || den > (i128(1) << 62)) return bad();
  }
  if (!digits) return bad();
  // optional "/denominator" (not combinable with a decimal point)
  if (i < text.size()) {
    if (dot) return bad();
    ++i;
    i128 d2 = 0;
    bool ddigits = false;
    for (; i < text.size(); ++i) {
      const char c = text[i];
      if (c < '0' || c > '9') return bad();
      d2 = d2 * 10 + (c - '0');
      ddigits = true;
      if (d2 > (i128(1) << 62)) return bad();
    }
    if (!ddigits) return bad();
    if (d2 == 0)
      fail(ErrorKind::validation,
           "rational: zero denominator in '" + text + "'");
    den = d2;
  }
  return reduce128(neg ? -num : num, den);
}

Rational operator+(const Rational& a, const Rational& b) {
  if (a.is_infinite() || b.is_infinite()) return Rational::infinity();
  return reduce128(i128(a.num) * b.den + i128(b.num) * a.den,
                   i128(a.den) * b.den);
}

Rational operator-(const Rational& a, const Rational& b) {
  require_finite(a, "-");
  require_finite(b, "-");
  return reduce128(i128(a.num) * b.den - i128(b.num) * a.den,
                   i128(a.den) * b.den);
}

Rational operator*(const Rational& a, const Rational& b) {
  if (a.is_infinite() || b.is_infinite()) {
    if (a.is_zero() || b.is_zero())
      fail(ErrorKind::validation, "rational: 0 * infinity");
    return Rational::infinity();
  }
  return reduce128(i128(a.num) * b.num, i128(a.den) * b.den);
}

Rational operator/(const Rational& a, const Rational& b) {
  require_finite(a, "/");
  require_finite(b, "/");
  if (b.num == 0) fail(ErrorKind::validation, "rational: division by zero");
  return reduce128(i128(a.num) * b.den, i128(a.den) * b.num);
}

Rational operator-(const Rational& a) {
  require_finite(a, "unary -");
  Rational r = a;
  r.num = -r.num;
  return r;
}

int compare(const Rational& a, const Rational& b) {
  if (a.is_infinite() && b.is_infinite()) return 0;
  if (a.is_infinite()) return 1;
  if (b.is_infinite()) return -1;
  const i128 lhs = i128(a.num) * b.den, rhs = i128(b.num) * a.den;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

bool operator==(const Rational& a, const Rational& b) { return compare(a, b) == 0; }
bool operator!=(const Rational& a, const Rational& b) { return compare(a, b) != 0; }
bool operator<(const Rational& a, const Rational& b) { return compare(a, b) < 0; }
bool operator<=(const Rational& a, const Rational& b) { return compare(a, b) <= 0; }
bool operator>(const Rational& a, const Rational& b) { return compare(a, b) > 0; }
bool operator>=(const Rational& a, const Rational& b) { return compare(a, b) >= 0; }

const char* to_string(Criticality c) {
  switch (c) {
    case Criticality::mass_subcritical: return "mass_subcritical";
    case Criticality::mass_critical: return "mass_critical";
    case Criticality::intermediate: return "intermediate";
    case Criticality::energy_critical: return "energy_critical";
    case Criticality::energy_supercritical: return "energy_supercritical";
    case Criticality::empty_range: return "empty_range";
  }
  return "?";
}

CriticalityReport criticality(int d, int n, int m, const Rational& p) {
  if (d < 1) fail(ErrorKind::validation, "criticality: d must be >= 1");
  if (n < 0) fail(ErrorKind::validation, "criticality: n must be >= 0");
  if (m != 1 && m != 2)
    fail(ErrorKind::validation, "criticality: equation order m must be 1 or 2");
  if (p <= Rational(0))
    fail(ErrorKind::validation, "criticality: p must be > 0");
  CriticalityReport rep;
  rep.d = d;
  rep.n = n;
  rep.m = m;
  rep.p = p;
  if (m == 2) {
    rep.mass_critical_p = Rational::make(8, d);
    rep.energy_critical_p =
        d + n > 4 ? Rational::make(8, d + n - 4) : Rational::infinity();
    rep.range_lo = rep.mass_critical_p;
    rep.range_hi = rep.energy_critical_p;
  } else {
    rep.mass_critical_p = Rational::make(4, d);
    rep.energy_critical_p =
        d > 2 ? Rational::make(4, d - 2) : Rational::infinity();
    rep.range_lo = Rational(0);
    rep.range_hi = rep.energy_critical_p;
  }
  if (rep.mass_critical_p >= rep.energy_critical_p) {
    rep.cls = Criticality::empty_range;
  } else if (p < rep.mass_critical_p) {
    rep.cls = Criticality::mass_subcritical;
  } else if (p == rep.mass_critical_p) {
    rep.cls = Criticality::mass_critical;
  } else if (p < rep.energy_critical_p) {
    rep.cls = Criticality::intermediate;
  } else if (p == rep.energy_critical_p) {
    rep.cls = Criticality::energy_critical;
  } else {
    rep.cls = Criticality::energy_supercritical;
  }
  return rep;
}

namespace {

const Rational kHalf = Rational::make(1, 2);

bool in_exponent_range(const Rational& e) {
  // valid Lebesgue exponent in [2, inf]
  return e.is_infinite() || e >= Rational(2);
}

}  // namespace

bool is_S_admissible(const Rational& q, const Rational& r, int d) {
  if (d < 1) fail(ErrorKind::validation, "is_S_admissible: d must be >= 1");
  if (!in_exponent_range(q) || !in_exponent_range(r)) return false;
  if (q == Rational(2) && r.is_infinite() && d == 2) return false;
  const Rational lhs =
      Rational(2) * q.reciprocal() + Rational(d) * r.reciprocal();
  return lhs == Rational(d) * kHalf;
}

bool is_B_admissible(const Rational& q, const Rational& r, int d,
                     const Rational& s) {
  if (d < 1) fail(ErrorKind::validation, "is_B_admissible: d must be >= 1");
  if (!in_exponent_range(q) || !in_exponent_range(r)) return false;
  const Rational lhs =
      Rational(4) * q.reciprocal() + Rational(d) * r.reciprocal();
  return lhs == Rational(d) * kHalf - s;
}

namespace {

// reciprocal-space window for valid [2, inf] exponents
bool inv_ok(const Rational& inv) {
  return inv >= Rational(0) && inv <= kHalf;
}

}  // namespace

bool verify_index1(const Index1Solution& sol, int d, const Rational& p) {
  const Rational iq = sol.q.reciprocal(), ir = sol.r.reciprocal();
  const Rational iqt = sol.q_tilde.reciprocal(), irt = sol.r_tilde.reciprocal();
  const Rational il = sol.l.reciprocal(), im = sol.m_exp.reciprocal();
  const Rational d2 = Rational(d) * kHalf;

  // regularity window: s > 1/2, delta > 0, s + 1/2 + delta <= 2
  if (!(sol.s > kHalf && sol.delta > Rational(0) &&
        sol.s + kHalf + sol.delta <= Rational(2)))
    return false;
  if (!is_B_admissible(sol.q, sol.r, d, sol.s)) return false;
  if (!is_B_admissible(sol.l, sol.m_exp, d, Rational(0))) return false;
  if (!(in_exponent_range(sol.q_tilde) && in_exponent_range(sol.r_tilde)))
    return false;
  // dual pair equalities: 1/rt' = (p+1)/r and 4/qt + d/rt = d/2 + s
  if (Rational(1) - irt != (p + Rational(1)) * ir) return false;
  if (Rational(4) * iqt + Rational(d) * irt != d2 + sol.s) return false;
  // 1/m' = 1/m + p/r
  if (Rational(1) - im != im + p * ir) return false;
  // strict inequalities with the reported slacks
  if (sol.slack_qtilde != Rational(1) - iqt - (p + Rational(1)) * iq)
    return false;
  if (sol.slack_l != Rational(1) - Rational(2) * il - p * iq) return false;
  if (!(sol.slack_qtilde > Rational(0) && sol.slack_l > Rational(0)))
    return false;
  // literal window check: 2 < m p / (m - 2) < 2d/(d-3)
  if (!(sol.m_exp > Rational(2))) return false;
  const Rational window = sol.m_exp * p / (sol.m_exp - Rational(2));
  if (sol.window_value != window) return false;
  if (!(window > Rational(2))) return false;
  if (d > 3 && !(window < Rational::make(2 * d, d - 3))) return false;
  return true;
}

SolveOutcome solve_index1(int d, int n, const Rational& p) {
  SolveOutcome out;
  const CriticalityReport crit = criticality(d, n, 2, p);
  if (crit.cls != Criticality::intermediate) {
    out.reason = "p outside the open scattering range (" +
                 crit.range_lo.str() + ", " + crit.range_hi.str() +
                 "): class " + to_string(crit.cls);
    return out;
  }
  const Rational d2 = Rational(d) * kHalf;
  const Rational r_hi =
      d > 3 ? Rational::make(2 * d, d - 3) : Rational::infinity();

  // lexicographic first hit over the rational lattice: s ascending in
  // (1/2, 3/2) step 1/64, r ascending in (2, 2d/(d-3)) step 1/8
  for (int si = 33; si <= 95; ++si) {
    const Rational s = Rational::make(si, 64);
    for (int ri = 17; ri <= 79; ++ri) {
      const Rational r = Rational::make(ri, 8);
      if (!(r < r_hi)) break;
      const Rational ir = r.reciprocal();
      const Rational iq = (d2 - s - Rational(d) * ir) / Rational(4);
      if (!inv_ok(iq)) continue;
      const Rational irt = Rational(1) - (p + Rational(1)) * ir;
      if (!inv_ok(irt)) continue;
      const Rational iqt = (d2 + s - Rational(d) * irt) / Rational(4);
      if (!inv_ok(iqt)) continue;
      const Rational im = (Rational(1) - p * ir) * kHalf;
      if (!inv_ok(im)) continue;
      const Rational il = (d2 - Rational(d) * im) / Rational(4);
      if (!inv_ok(il)) continue;
      const Rational slack1 = Rational(1) - iqt - (p + Rational(1)) * iq;
      if (!(slack1 > Rational(0))) continue;
      const Rational slack2 = Rational(1) - Rational(2) * il - p * iq;
      if (!(slack2 > Rational(0))) continue;

      Index1Solution sol;
      sol.s = s;
      sol.delta = Rational::make(3, 2) - s;
      sol.q = iq.reciprocal();
      sol.r = r;
      sol.q_tilde = iqt.reciprocal();
      sol.r_tilde = irt.reciprocal();
      sol.l = il.reciprocal();
      sol.m_exp = im.reciprocal();
      sol.slack_qtilde = slack1;
      sol.slack_l = slack2;
      sol.window_value = sol.m_exp * p / (sol.m_exp - Rational(2));
      if (!verify_index1(sol, d, p))
        fail(ErrorKind::validation,
             "solve_index1: candidate failed exact re-verification");
      out.feasible = true;
      out.index1 = sol;
      return out;
    }
  }
  out.reason = "no lattice point within denominator bound 64";
  return out;
}

bool verify_index2(const Index2Solution& sol, int d, const Rational& p) {
  const Rational x = sol.q_theta.reciprocal(), y = sol.r_theta.reciprocal();
  const Rational iqt = sol.q_tilde.reciprocal(), irt = sol.r_tilde.reciprocal();
  const Rational il = sol.l.reciprocal(), im = sol.m_exp.reciprocal();
  if (!(sol.theta > Rational(0) && sol.theta <= Rational(1))) return false;
  if (!(sol.s > Rational(0) && sol.s < Rational(2))) return false;
  if (!is_B_admissible(sol.q_theta, sol.r_theta, d, sol.s)) return false;
  if (!is_B_admissible(sol.l, sol.m_exp, d, Rational(0))) return false;
  if (!(in_exponent_range(sol.q_tilde) && in_exponent_range(sol.r_tilde)))
    return false;
  // 1/((p+1) qt') = theta/q_theta and 1/((p+1) rt') = theta/r_theta
  //   + 2(1-theta)/(p d)
  if ((Rational(1) - iqt) / (p + Rational(1)) != sol.theta * x) return false;
  const Rational rt_rhs =
      sol.theta * y + Rational(2) * (Rational(1) - sol.theta) /
                          (p * Rational(d));
  if ((Rational(1) - irt) / (p + Rational(1)) != rt_rhs) return false;
  // 1/m' = 1/m + p/r_theta and 1/l' = 1/l + p/q_theta (equalities here)
  if (Rational(1) - im != im + p * y) return false;
  if (Rational(1) - il != il + p * x) return false;
  return true;
}

SolveOutcome solve_index2(int d, int n, const Rational& p) {
  SolveOutcome out;
  const CriticalityReport crit = criticality(d, n, 2, p);
  if (crit.cls != Criticality::intermediate) {
    out.reason = "p outside the open scattering range (" +
                 crit.range_lo.str() + ", " + crit.range_hi.str() +
                 "): class " + to_string(crit.cls);
    return out;
  }
  // the (l,m) admissibility equalities force s = d/2 - 4/p
  const Rational s = Rational(d) * kHalf - Rational(4) / p;
  if (!(s > Rational(0) && s < Rational(2))) {
    out.reason = "forced regularity s = d/2 - 4/p = " + s.str() +
                 " outside (0, 2)";
    return out;
  }
  const Rational four_over_p = Rational(4) / p;
  // theta descending from 1 (step 1/64), x = 1/q_theta ascending
  for (int ti = 64; ti >= 1; --ti) {
    const Rational theta = Rational::make(ti, 64);
    for (int xi = 0; xi <= 32; ++xi) {
      const Rational x = Rational::make(xi, 64);
      const Rational y = (four_over_p - Rational(4) * x) / Rational(d);
      if (!inv_ok(y)) continue;
      const Rational iqt = Rational(1) - (p + Rational(1)) * theta * x;
      if (!inv_ok(iqt)) continue;
      const Rational irt =
          Rational(1) -
          (p + Rational(1)) * (theta * y + Rational(2) * (Rational(1) - theta) /
                                               (p * Rational(d)));
      if (!inv_ok(irt)) continue;
      const Rational im = (Rational(1) - p * y) * kHalf;
      if (!inv_ok(im)) continue;
      const Rational il = (Rational(1) - p * x) * kHalf;
      if (!inv_ok(il)) continue;

      Index2Solution sol;
      sol.theta = theta;
      sol.s = s;
      sol.q_theta = x.reciprocal();
      sol.r_theta = y.reciprocal();
      sol.q_tilde = iqt.reciprocal();
      sol.r_tilde = irt.reciprocal();
      sol.l = il.reciprocal();
      sol.m_exp = im.reciprocal();
      if (!verify_index2(sol, d, p)) continue;
      out.feasible = true;
      out.index2 = sol;
      return out;
    }
  }
  out.reason = "no lattice point within denominator bound 64";
  return out;
}

double lemma_delta_ratio(const ComplexField& f, double s, double p) {
  const Grid& g = f.grid();
  if (g.n < 1)
    fail(ErrorKind::validation, "lemma_delta_ratio: requires n >= 1");
  if (!(s > 0.0 && s < 1.0))
    fail(ErrorKind::validation, "lemma_delta_ratio: s must lie in (0, 1)");
  if (p <= 0.0) fail(ErrorKind::validation, "lemma_delta_ratio: p must be > 0");

  // fiberwise |u|^p u
  ComplexField w(f.grid_ptr());
  for (std::size_t i = 0; i < g.total; ++i)
    w[i] = std::pow(std::abs(f[i]), p) * f[i];

  std::vector<cplx> uhat(g.total), what(g.total);
  fiber_forward_raw(g, f.data(), uhat.data());
  fiber_forward_raw(g, w.data(), what.data());

  // homogeneous weights |k_alpha|^{2s} in fiber FFT order
  const std::size_t fiber = g.torus_count;
  std::vector<double> weight(fiber);
  for (std::size_t j = 0; j < fiber; ++j) {
    double k2 = 0.0;
    for (int a = 0; a < g.n; ++a) {
      const std::size_t sub = g.strides[static_cast<std::size_t>(g.d + a)];
      const int count = g.dims[static_cast<std::size_t>(g.d + a)];
      const int ai =
          static_cast<int>((j / sub) % static_cast<std::size_t>(count));
      const double k = g.table.axis[static_cast<std::size_t>(g.d + a)]
                                   [static_cast<std::size_t>(ai)];
      k2 += k * k;
    }
    weight[j] = k2 == 0.0 ? 0.0 : std::pow(k2, s);
  }

  double best = 0.0;
  for (std::size_t node = 0; node < g.euclid_count; ++node) {
    const cplx* uc = uhat.data() + node * fiber;
    const cplx* wc = what.data() + node * fiber;
    double lhs2 = 0.0, rhs2 = 0.0, sup = 0.0;
    for (std::size_t j = 0; j < fiber; ++j) {
      lhs2 += weight[j] * std::norm(wc[j]);
      rhs2 += weight[j] * std::norm(uc[j]);
      sup = std::max(sup, std::abs(f[node * fiber + j]));
    }
    const double rhs = std::sqrt(rhs2) * std::pow(sup, p);
    if (rhs <= 0.0) continue;
    best = std::max(best, std::sqrt(lhs2) / rhs);
  }
  return best;
}

}  // namespace wgdl
