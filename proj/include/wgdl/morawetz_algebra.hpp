#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "wgdl/common.hpp"

namespace wgdl::weight {

// Pair weight a(x,y) = <x-y> = (1 + |x-y|^2)^{1/2} and its derivatives as
// closed forms in r = |x-y| and the dimension d. Matrix-valued derivatives
// are returned as radial coefficient pairs:
//   D_{ij} = delta_coef * delta_ij + outer_coef * z_i z_j,   z = x - y.
struct RadialPair {
  double delta_coef = 0.0;
  double outer_coef = 0.0;
};

double bracket(double r);                 // <r> = sqrt(1 + r^2)
double a(double r);                       // the weight itself
double grad_coef(double r);               // grad a = z * (1/<r>)
double lap(double r, int d);              // (d-1)/<r> + 1/<r>^3
RadialPair hess(double r);                // delta/<r> - zz/<r>^3
RadialPair hess_lap(double r, int d);     // second derivatives of lap a
double bilap(double r, int d);            // -(d-1)(d-3)/<r>^3 - 6(d-3)/<r>^5 - 15/<r>^7
double trilap(double r, int d);           // 3(d-1)(d-3)(d-5)/<r>^5 + 45(d-3)(d-5)/<r>^7
                                          //   + 315(d-5)/<r>^9 + 945/<r>^11

enum class Which { a, grad, lap, hess, hess_lap, bilap, trilap };
Which which_from_string(const std::string& name);
std::string to_string(Which which);
bool is_matrix_valued(Which which);

struct WeightEval {
  double scalar = 0.0;   // for scalar selectors and grad (radial coefficient)
  RadialPair pair;       // for matrix selectors
  bool matrix = false;
};
WeightEval eval_weight_derivative(Which which, double r, int d);

// Finite-difference verification of every closed form. Each selector is
// checked against 6th-order finite differences of the next-lower closed form
// (grad/hess/lap from a itself, hess_lap/bilap from lap, trilap from bilap),
// so the chain is anchored at the weight alone. Stencils act on the planar
// section z = (z1, z2) of the radial profile, which is smooth through the
// origin, so near-zero radii stay well-conditioned.
struct FdSample {
  Which which;
  double r = 0.0;
  int d = 0;
  double rel_error = 0.0;
};
struct FdReport {
  double max_rel_error = 0.0;
  FdSample worst;
  int samples = 0;
};
FdReport fd_verify(Which which, int samples, std::uint64_t seed);
FdReport fd_verify_all(int samples_per_selector, std::uint64_t seed);

// Raw finite-difference values behind fd_verify, exposed for negative
// controls. Scalar selectors fill `value` with the stencil evaluation of the
// derivative itself; grad fills the radial first derivative (grad_coef * r);
// matrix selectors fill the radial/tangential Hessian contractions, which the
// closed forms predict as delta_coef + outer_coef * r^2 and delta_coef.
struct FdProbe {
  double value = 0.0;
  double radial = 0.0;
  double tangential = 0.0;
};
FdProbe fd_probe(Which which, double r, int d);

// Decomposition of g into the component along e and the orthogonal rest.
struct DirectionalSplit {
  std::vector<double> along;
  std::vector<double> perp;
};
DirectionalSplit directional_split(const std::vector<double>& g,
                                   const std::vector<double>& e);

// Sign claims, per dimension:
//   quadratic:  -d^2 - 8d + 45 <= 0          (stated for d >= 4)
//   trilap:     trilap >= 0 on r in [0,100]  (stated for d >= 5)
//   bilap:      bilap  <= 0 on r in [0,100]  (stated for d >= 3)
//   mixed_form: -|g|^2/<r>^3 - r^2 |g_perp|^2/<r>^3 <= 0 on random samples
struct SignEntry {
  int d = 0;
  double quadratic_value = 0.0;
  bool quadratic_pass = false;
  bool trilap_pass = false;
  double trilap_witness_r = -1.0;  // first violating r when failing
  bool bilap_pass = false;
  double bilap_witness_r = -1.0;
  bool mixed_form_pass = false;
};
struct SignReport {
  std::vector<SignEntry> entries;
  int r_samples = 0;
};
SignReport sign_certificates(int d_min, int d_max, int r_samples = 1000,
                             std::uint64_t seed = 1);

// Pointwise Hessian-contraction chain on random complex matrices H,
// directions e = z, radii r:
//   -hess(r)_{jk} H_{ij} conj(H_{ik})  <=  -(|H|^2 - |H e_hat|^2) / <r>,
// with equality structure at r = 0 and a closed form for H = I.
struct HessianReport {
  int samples = 0;
  int violations = 0;
  double max_violation = 0.0;    // most positive (lhs - rhs); <= 0 means pass
  double diag_identity_error = 0.0;  // H = I closed-form check
  double r0_equality_error = 0.0;    // r = 0 equality case
  bool pass = false;
};
HessianReport hessian_bound_check(int samples, int d, std::uint64_t seed);

}  // namespace wgdl::weight
