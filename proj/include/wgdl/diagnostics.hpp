#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wgdl/field.hpp"

namespace wgdl {

// What to compute per record. q/r entries keep the literal config token as
// the serialization key so output is stable regardless of float formatting.
struct DiagnosticsConfig {
  int m = 2;            // dispersion order: 1 Laplacian, 2 biharmonic
  double p = 2.0;       // nonlinearity power
  double lambda = 1.0;  // +1 defocusing, -1 focusing
  std::vector<std::pair<std::string, double>> q_values;
  std::vector<std::pair<std::string, double>> r_values;
  bool with_morawetz = true;
  bool with_gn = false;
  double gn_r = 1.0;
  // Expensive pair-sum decomposition; consumed by the run summary only.
  bool with_rhs_terms = false;
};

struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double kinetic = 0.0;    // (1/2) ||Delta^{m/2} u||^2
  double potential = 0.0;  // lambda/(p+2) ||u||_{p+2}^{p+2}
  std::vector<std::pair<std::string, double>> lq_norms;
  std::vector<std::pair<std::string, double>> cube_mass;
  double morawetz_action = 0.0;
  double morawetz_integrand = 0.0;  // first-r cube mass ^ ((p+4)/2)
  double h2_norm = 0.0;
  bool post_wrap = false;
  // in-memory extras; not part of the serialized record
  double h1_norm = 0.0;
  double gn = 0.0;
  double sup_abs = 0.0;
};

double mass(const ComplexField& f);
double kinetic_energy(const ComplexField& f, int m);
double potential_energy(const ComplexField& f, double p, double lambda);
double energy(const ComplexField& f, const DiagnosticsConfig& cfg);

// Windowed mass sup over grid-aligned centers; the half-width rounds down to
// whole cells and the effective value is reported back.
struct CubeMass {
  double value = 0.0;
  double effective_r = 0.0;
};
CubeMass sup_cube_mass(const ComplexField& f, double r);

// Torus-integrated mass density and momentum current on the Euclidean grid.
struct Marginals {
  std::vector<double> rho;                   // euclid_count
  std::vector<std::vector<double>> current;  // [d][euclid_count]
};
Marginals marginals(const ComplexField& f);

// Pair-interaction action M = 4 * int J . (grad a * rho) dx with the
// whole-space kernel grad a(z) = z/<z>, evaluated by zero-padded FFT
// convolution on the doubled Euclidean box.
double morawetz_action(const ComplexField& f);

// Definitional double sum over all grid pairs; the correctness oracle for
// the FFT path. Guarded to small Euclidean grids.
double morawetz_action_bruteforce(const ComplexField& f);

// Labeled groups of the time derivative of the pair action for the
// fourth-order flow (u = v specialization), all as Euclidean pair sums of
// torus-integrated derivative marginals against closed-form weights:
//   d/dt M = [five density/Hessian groups]          (m1_plus_m2)
//          + [torus Hessian group + torus current]  (term_I)
//          + [torus density group]                  (term_II)
//          + [nonlinear closed form]                (nonlinear_bracket)
// i_hessian_part (PSD-against-PSD contraction) and term_II are the pieces
// with a definite sign for d >= 3; their sum is exposed for the sign tests.
struct RhsTerms {
  double m1_plus_m2 = 0.0;
  double term_I = 0.0;
  double term_II = 0.0;
  double nonlinear_bracket = 0.0;
  double i_hessian_part = 0.0;  // part of term_I
  double i_cross_part = 0.0;    // part of term_I
  double sign_definite_part = 0.0;  // i_hessian_part + term_II
  double sum() const { return m1_plus_m2 + term_I + term_II + nonlinear_bracket; }
};
RhsTerms morawetz_rhs_terms(const ComplexField& f, const DiagnosticsConfig& cfg);

// || e^{-i t1 sym} u(t1) - e^{-i t2 sym} u(t2) ||_{H^2} with the exact
// backward linear flow of order m.
double scattering_residual(const ComplexField& u_t1, double t1,
                           const ComplexField& u_t2, double t2, int m);

// Trapezoidal time integral of morawetz_integrand over the series, plus the
// boundedness quotient C_test = integral / h2(first record)^4.
struct MorawetzLhs {
  double integral = 0.0;
  double c_test = 0.0;
};
MorawetzLhs morawetz_lhs_accumulate(const std::vector<DiagnosticsRecord>& series);

// L^{m_exp}-in-x of the H^gamma torus-fiber norm (the spatial factor of the
// composed spacetime norms).
double spatial_factor(const ComplexField& f, double m_exp, double gamma);

// Discrete L^l-in-time (trapezoid; l = inf -> max) of a sampled factor.
double spacetime_norm_accumulate(
    const std::vector<std::pair<double, double>>& series, double l);

// Localized Gagliardo-Nirenberg quotient at exponent q* = 2 + 4/(d+n):
//   ||u||_{q*} / ( sup_cube_mass(r)^{2/(d+n+2)} * ||u||_{H^1}^{(d+n)/(d+n+2)} )
double gn_ratio(const ComplexField& f, double r);

struct DecayRow {
  std::string key;
  double q = 0.0;
  bool in_range = true;           // q in (2, 2 + 4/(d+n)]
  double initial = 0.0;           // first pre-wrap value
  double final_prewrap = 0.0;     // last pre-wrap value
  double ratio = 0.0;             // final / initial (0 if initial == 0)
  double frac_decreasing = 0.0;   // fraction of decreasing consecutive steps
  bool monotone = false;
};
struct DecayReport {
  std::vector<DecayRow> rows;
  double max_gn = 0.0;
  int prewrap_records = 0;
  std::vector<std::string> warnings;
};
DecayReport decay_report(const std::vector<DiagnosticsRecord>& series,
                         const std::vector<std::pair<std::string, double>>& q_list,
                         int d, int n);

DiagnosticsRecord compute_record(const ComplexField& f, double t,
                                 const DiagnosticsConfig& cfg, bool post_wrap);

// One NDJSON object with the fixed key set
// (t, mass, energy, kinetic, potential, lq, cube_mass, morawetz, h2,
// post_wrap); doubles printed shortest-round-trip.
std::string to_ndjson(const DiagnosticsRecord& rec);
std::string csv_header(const DiagnosticsRecord& rec);
std::string to_csv_row(const DiagnosticsRecord& rec);

}  // namespace wgdl
