#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "wgdl/common.hpp"
#include "wgdl/field.hpp"

namespace wgdl {

// Exact rational with a single point at +infinity (den == 0, num == 1).
// All arithmetic is exact; intermediate products go through 128-bit
// integers and overflow past 64 bits is an error rather than silent wrap.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n) : num(n), den(1) {}  // NOLINT: implicit by design
  static Rational make(std::int64_t n, std::int64_t d);
  static Rational infinity();

  bool is_infinite() const { return den == 0; }
  bool is_zero() const { return den != 0 && num == 0; }
  Rational reciprocal() const;  // 0 <-> infinity
  double to_double() const;
  std::string str() const;

  // Parses "a", "a/b", or exact decimal literals like "1.8".
  static Rational parse(const std::string& text);
};

Rational operator+(const Rational& a, const Rational& b);
Rational operator-(const Rational& a, const Rational& b);
Rational operator*(const Rational& a, const Rational& b);
Rational operator/(const Rational& a, const Rational& b);
Rational operator-(const Rational& a);
int compare(const Rational& a, const Rational& b);  // -1, 0, +1; inf > finite
bool operator==(const Rational& a, const Rational& b);
bool operator!=(const Rational& a, const Rational& b);
bool operator<(const Rational& a, const Rational& b);
bool operator<=(const Rational& a, const Rational& b);
bool operator>(const Rational& a, const Rational& b);
bool operator>=(const Rational& a, const Rational& b);

// Criticality classification of the nonlinearity power p on R^d x T^n.
// Fourth-order (m = 2): mass-critical power 8/d, energy-critical power
// 8/(d+n-4) (infinite when d+n <= 4); the open scattering range is the
// interval between them and is empty exactly when n >= 4. Second-order
// (m = 1): thresholds 4/d and 4/(d-2), reported window (0, 4/(d-2)).
enum class Criticality {
  mass_subcritical,
  mass_critical,
  intermediate,
  energy_critical,
  energy_supercritical,
  empty_range,
};
const char* to_string(Criticality c);

struct CriticalityReport {
  int d = 0;
  int n = 0;
  int m = 2;
  Rational p;
  Rational mass_critical_p;
  Rational energy_critical_p;  // may be infinite
  Rational range_lo;           // reported well-posedness window
  Rational range_hi;           // may be infinite
  Criticality cls = Criticality::empty_range;
};
CriticalityReport criticality(int d, int n, int m, const Rational& p);

// Admissibility relations (exponents may be infinite):
//   S-admissible: 2/q + d/r = d/2, 2 <= q,r <= inf, (q,r,d) != (2,inf,2)
//   B-admissible: 4/q + d/r = d/2 - s, 2 <= q,r <= inf
bool is_S_admissible(const Rational& q, const Rational& r, int d);
bool is_B_admissible(const Rational& q, const Rational& r, int d,
                     const Rational& s);

// Certified solutions of the two exponent systems. Every relation is exact
// in rational arithmetic; strict inequalities carry positive slack.
struct Index1Solution {
  Rational s, delta;
  Rational q, r;                // B-admissible with regularity s
  Rational q_tilde, r_tilde;    // dual pair: 4/qt + d/rt = d/2 + s
  Rational l, m_exp;            // B-admissible with s = 0
  Rational slack_qtilde;        // 1 - 1/qt - (p+1)/q > 0
  Rational slack_l;             // 1 - 2/l - p/q > 0
  Rational window_value;        // m p/(m-2), must lie in (2, 2d/(d-3))
};

struct Index2Solution {
  Rational theta;               // in (0, 1]
  Rational s;                   // forced: s = d/2 - 4/p
  Rational q_theta, r_theta;    // B-admissible with regularity s
  Rational q_tilde, r_tilde;    // 1/((p+1) qt') = theta/q_theta, etc.
  Rational l, m_exp;            // B-admissible with s = 0
};

struct SolveOutcome {
  bool feasible = false;
  std::string reason;  // set when infeasible
  std::optional<Index1Solution> index1;
  std::optional<Index2Solution> index2;
};

SolveOutcome solve_index1(int d, int n, const Rational& p);
SolveOutcome solve_index2(int d, int n, const Rational& p);

// Independent exact re-checks of a returned certificate (used by the solver
// before returning, and by tests as a second route).
bool verify_index1(const Index1Solution& sol, int d, const Rational& p);
bool verify_index2(const Index2Solution& sol, int d, const Rational& p);

// Numerical evidence for the fiberwise product bound
//   |||u|^p u||_{Hdot^s_alpha} <= C ||u||_{Hdot^s_alpha} ||u||_{Linf_alpha}^p :
// returns the max over Euclidean nodes of LHS/RHS on the discrete fibers
// (nodes with vanishing RHS are skipped). Requires n >= 1 and s in (0,1).
double lemma_delta_ratio(const ComplexField& f, double s, double p);

}  // namespace wgdl
